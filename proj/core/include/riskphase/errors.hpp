#pragma once

#include <stdexcept>
#include <string>

namespace riskphase {

// Base of every error raised by the library. Each subclass names one
// failure mode so callers can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RISKPHASE_DEFINE_ERROR(Name) \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

RISKPHASE_DEFINE_ERROR(InvalidArgument);
RISKPHASE_DEFINE_ERROR(ParseError);
RISKPHASE_DEFINE_ERROR(ZeroVariance);
RISKPHASE_DEFINE_ERROR(UnknownSeverityLevel);
RISKPHASE_DEFINE_ERROR(SchemaMismatch);
RISKPHASE_DEFINE_ERROR(EmptyAfterFilter);
RISKPHASE_DEFINE_ERROR(UnknownGroup);
RISKPHASE_DEFINE_ERROR(InsufficientData);
RISKPHASE_DEFINE_ERROR(NonPositiveLag);
RISKPHASE_DEFINE_ERROR(ConstantIndex);
RISKPHASE_DEFINE_ERROR(NoOverlap);
RISKPHASE_DEFINE_ERROR(MissingExposure);
RISKPHASE_DEFINE_ERROR(SingularDesign);
RISKPHASE_DEFINE_ERROR(AllZeroResponse);
RISKPHASE_DEFINE_ERROR(SeriesTooShort);
RISKPHASE_DEFINE_ERROR(EmptySweep);
RISKPHASE_DEFINE_ERROR(TooManyStates);
RISKPHASE_DEFINE_ERROR(KExceedsPoints);
RISKPHASE_DEFINE_ERROR(WindowTooShort);
RISKPHASE_DEFINE_ERROR(InsufficientWindow);
RISKPHASE_DEFINE_ERROR(ConstantInput);
RISKPHASE_DEFINE_ERROR(Unclassifiable);
RISKPHASE_DEFINE_ERROR(RunNotFound);
RISKPHASE_DEFINE_ERROR(ArtifactNotFound);
RISKPHASE_DEFINE_ERROR(SealedRun);

#undef RISKPHASE_DEFINE_ERROR

// Raised by the pipeline runner; carries the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace riskphase
