#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskphase/month.hpp"

namespace riskphase {

/// Aligned per-month vectors. Optional columns are either empty or the same
/// length as `months`.
struct MonthlyPanel {
  std::vector<MonthIndex> months;
  std::vector<long> raw_count;
  std::vector<double> nowcast_count;
  /// Per-month exposure; nullopt marks an uncovered month.
  std::vector<std::optional<double>> exposure;
  std::vector<double> media_index;
  std::vector<double> severity_sum;

  std::size_t size() const { return months.size(); }
  bool has_exposure() const { return !exposure.empty(); }
  bool has_media() const { return !media_index.empty(); }
  bool has_severity() const { return !severity_sum.empty(); }

  /// Position of `m`, or nullopt when outside the panel.
  std::optional<std::size_t> position(MonthIndex m) const;

  /// Throws InvalidArgument when column lengths disagree.
  void validate() const;
};

struct Standardized {
  std::vector<double> z;
  double mean = 0.0;
  double sd = 1.0;  // population convention
};

/// z = (x - mean) / sd with population sd. Throws ZeroVariance for a
/// constant series and InvalidArgument for fewer than two points.
Standardized standardize(std::span<const double> x);
std::vector<double> unstandardize(const Standardized& s);

/// OLS slope over the trailing `window` points ending at each t. Head
/// positions use the truncated window (>= 2 points); position 0 gets 0.
std::vector<double> rolling_slope(std::span<const double> x, int window = 3);

/// Standardized risk plus its local trend.
struct RiskSeries {
  std::vector<MonthIndex> months;
  std::vector<double> z;
  std::vector<double> slope;
  double window_mean = 0.0;
  double window_sd = 1.0;
  std::string sd_convention = "population";

  std::size_t size() const { return z.size(); }
  std::optional<std::size_t> position(MonthIndex m) const;
};

RiskSeries make_risk_series(std::vector<MonthIndex> months, std::span<const double> values,
                            int slope_window = 3);

enum class SeverityLevel { Negligible, Minor, Substantial, Severe };

std::string_view to_string(SeverityLevel level);
/// Case-insensitive; throws UnknownSeverityLevel.
SeverityLevel parse_severity(std::string_view text);

class SeverityScale {
 public:
  /// Negligible 1, Minor 3, Substantial 10, Severe 50.
  SeverityScale();
  /// Throws InvalidArgument unless weights strictly increase with level.
  explicit SeverityScale(std::map<SeverityLevel, double> weights);

  /// Throws UnknownSeverityLevel for a level the scale does not map.
  double weight(SeverityLevel level) const;
  const std::map<SeverityLevel, double>& weights() const { return weights_; }

 private:
  std::map<SeverityLevel, double> weights_;
};

double severity_sum(std::span<const SeverityLevel> levels, const SeverityScale& scale);

}  // namespace riskphase
