#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "riskphase/agreement.hpp"
#include "riskphase/delay.hpp"
#include "riskphase/exposure.hpp"
#include "riskphase/forecast.hpp"
#include "riskphase/glm.hpp"
#include "riskphase/hmm.hpp"
#include "riskphase/impact.hpp"
#include "riskphase/ingest.hpp"
#include "riskphase/kmeans.hpp"
#include "riskphase/pelt.hpp"
#include "riskphase/phases.hpp"
#include "riskphase/sensitivity.hpp"

namespace riskphase {

using json = nlohmann::json;

namespace stats {
void to_json(json& j, const OlsFit& f);
}

void to_json(json& j, const MonthIndex& m);
void from_json(const json& j, MonthIndex& m);

void to_json(json& j, const MonthlyPanel& p);
void from_json(const json& j, MonthlyPanel& p);
void to_json(json& j, const RiskSeries& r);
void from_json(const json& j, RiskSeries& r);

void to_json(json& j, const DelayModel& m);
void to_json(json& j, const DelaySelection& s);
void to_json(json& j, const NowcastAdjustment& n);
void to_json(json& j, const ExposureIndex& e);
void to_json(json& j, const ExposureRate& r);

void to_json(json& j, const CoefficientRow& c);
void to_json(json& j, const CountModelFit& f);
void to_json(json& j, const DispersionDiagnostics& d);
void to_json(json& j, const AlphaSearch& a);
void to_json(json& j, const LikelihoodRatio& lr);
void to_json(json& j, const ExcessRiskSignal& e);

void to_json(json& j, const Segment& s);
void from_json(const json& j, Segment& s);
void to_json(json& j, const Segmentation& s);
void from_json(const json& j, Segmentation& s);
void to_json(json& j, const Plateau& p);
void to_json(json& j, const PenaltySweep& s);

void to_json(json& j, const HmmFit& f);
void to_json(json& j, const HmmSelection& s);
void to_json(json& j, const ClusterFit& f);
void to_json(json& j, const KMeansSelection& s);
void to_json(json& j, const MacroBands& b);

void to_json(json& j, const PhaseThresholds& t);
void from_json(const json& j, PhaseThresholds& t);
void to_json(json& j, const PhaseTimeline& t);
void to_json(json& j, const SegmentClassification& s);

void to_json(json& j, const AdfResult& a);
void to_json(json& j, const ArimaFit& f);
void to_json(json& j, const ArimaSelection& s);
void to_json(json& j, const ForecastBand& b);

void to_json(json& j, const ImpactResult& r);
void to_json(json& j, const ImpactFamily& f);
void to_json(json& j, const EffectConfusion& c);

void to_json(json& j, const CcfResult& c);
void to_json(json& j, const PhaseAgreement& a);
void to_json(json& j, const PartitionAgreement& a);

void to_json(json& j, const InvariantZone& z);
void from_json(const json& j, InvariantZone& z);
void to_json(json& j, const SweepResult& s);
void to_json(json& j, const TwoThresholdSweep& s);

/// Non-finite doubles become null.
json number(double v);

/// Canonical text: sorted keys, no whitespace, trailing newline.
std::string canonical_dump(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace riskphase
