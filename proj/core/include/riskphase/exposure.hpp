#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "riskphase/ingest.hpp"
#include "riskphase/series.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

enum class ExposureSource { External, DepreciatedInstalledBase };

struct ExposureIndex {
  std::vector<MonthIndex> months;
  std::vector<double> value;
  ExposureSource source = ExposureSource::External;
  std::optional<double> half_life_months;
  std::optional<std::pair<double, double>> scale_range;
};

/// value(t) = sum over events with month <= t of stars * 0.5^((t - month) / half_life).
ExposureIndex depreciated_installed_base(const std::vector<StarEvent>& events, double half_life_months,
                                         MonthIndex first, MonthIndex last);

/// Affine min-max map onto [lo, hi]. Throws ConstantIndex.
ExposureIndex scale_range(const ExposureIndex& index, double lo = 10.0, double hi = 100.0);

struct ExposureMerge {
  MonthlyPanel panel;
  std::vector<MonthIndex> uncovered;  // panel months without exposure
  std::size_t covered = 0;
};

/// Attaches exposure where the series covers panel months. Throws NoOverlap.
ExposureMerge merge_external(const MonthlyPanel& panel, const std::vector<MonthValue>& exposure);
ExposureMerge merge_external(const MonthlyPanel& panel, const ExposureIndex& index);

struct ExposureRate {
  std::vector<MonthIndex> months;  // months with positive exposure
  std::vector<double> rate;        // count / (exposure / per)
  double aggregate_rate = 0.0;     // sum(count) / sum(exposure) * per
  double mean_monthly_rate = 0.0;
  std::optional<stats::OlsFit> trend;  // rate on month position; needs >= 3 months
  double per = 1e6;
};

/// Uses raw counts. Months with missing or zero exposure are skipped.
/// Throws MissingExposure when no month qualifies.
ExposureRate exposure_adjusted_rate(const MonthlyPanel& panel, double per = 1e6);

}  // namespace riskphase
