#include "riskphase/series.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

std::optional<std::size_t> MonthlyPanel::position(MonthIndex m) const {
  if (months.empty()) return std::nullopt;
  const int off = months_between(months.front(), m);
  if (off < 0 || static_cast<std::size_t>(off) >= months.size()) return std::nullopt;
  return static_cast<std::size_t>(off);
}

void MonthlyPanel::validate() const {
  const auto n = months.size();
  auto check = [n](std::size_t len, bool optional, const char* name) {
    if (len != n && !(optional && len == 0)) {
      throw InvalidArgument(std::string("panel column '") + name + "' has wrong length");
    }
  };
  check(raw_count.size(), false, "raw_count");
  check(nowcast_count.size(), false, "nowcast_count");
  check(exposure.size(), true, "exposure");
  check(media_index.size(), true, "media_index");
  check(severity_sum.size(), true, "severity_sum");
  for (std::size_t i = 1; i < n; ++i) {
    if (months_between(months[i - 1], months[i]) != 1) throw InvalidArgument("panel months are not contiguous");
  }
}

Standardized standardize(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("standardize needs at least two points");
  Standardized s;
  s.mean = stats::mean(x);
  s.sd = std::sqrt(stats::population_variance(x));
  // Relative test: sd at rounding level of the values means a constant series.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::fabs(v));
  if (!(s.sd > 1e-14 * std::max(1.0, scale))) throw ZeroVariance("standardize: series is constant");
  s.z.reserve(x.size());
  for (double v : x) s.z.push_back((v - s.mean) / s.sd);
  return s;
}

std::vector<double> unstandardize(const Standardized& s) {
  std::vector<double> out;
  out.reserve(s.z.size());
  for (double z : s.z) out.push_back(z * s.sd + s.mean);
  return out;
}

std::vector<double> rolling_slope(std::span<const double> x, int window) {
  if (window < 2) throw InvalidArgument("rolling_slope window must be >= 2");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(window), t + 1);
    out[t] = stats::slope_against_index(x.subspan(t + 1 - len, len));
  }
  return out;
}

std::optional<std::size_t> RiskSeries::position(MonthIndex m) const {
  for (std::size_t i = 0; i < months.size(); ++i) {
    if (months[i] == m) return i;
  }
  return std::nullopt;
}

RiskSeries make_risk_series(std::vector<MonthIndex> months, std::span<const double> values,
                            int slope_window) {
  if (months.size() != values.size()) throw InvalidArgument("risk series: months/values length mismatch");
  const Standardized s = standardize(values);
  RiskSeries r;
  r.months = std::move(months);
  r.z = s.z;
  r.slope = rolling_slope(r.z, slope_window);
  r.window_mean = s.mean;
  r.window_sd = s.sd;
  return r;
}

std::string_view to_string(SeverityLevel level) {
  switch (level) {
    case SeverityLevel::Negligible: return "Negligible";
    case SeverityLevel::Minor: return "Minor";
    case SeverityLevel::Substantial: return "Substantial";
    case SeverityLevel::Severe: return "Severe";
  }
  return "?";
}

SeverityLevel parse_severity(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "negligible" || lower == "1") return SeverityLevel::Negligible;
  if (lower == "minor" || lower == "2") return SeverityLevel::Minor;
  if (lower == "substantial" || lower == "3") return SeverityLevel::Substantial;
  if (lower == "severe" || lower == "4") return SeverityLevel::Severe;
  throw UnknownSeverityLevel("unknown severity level '" + std::string(text) + "'");
}

SeverityScale::SeverityScale()
    : weights_{{SeverityLevel::Negligible, 1.0},
               {SeverityLevel::Minor, 3.0},
               {SeverityLevel::Substantial, 10.0},
               {SeverityLevel::Severe, 50.0}} {}

SeverityScale::SeverityScale(std::map<SeverityLevel, double> weights) : weights_(std::move(weights)) {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [level, w] : weights_) {
    if (!(w > prev)) throw InvalidArgument("severity weights must increase strictly with level");
    prev = w;
  }
}

double SeverityScale::weight(SeverityLevel level) const {
  auto it = weights_.find(level);
  if (it == weights_.end()) {
    throw UnknownSeverityLevel("severity level '" + std::string(to_string(level)) + "' not in scale");
  }
  return it->second;
}

double severity_sum(std::span<const SeverityLevel> levels, const SeverityScale& scale) {
  double total = 0.0;
  for (auto level : levels) total += scale.weight(level);
  return total;
}

}  // namespace riskphase
