#include "riskphase/exposure.hpp"

#include <algorithm>
#include <cmath>

#include "riskphase/errors.hpp"

namespace riskphase {

ExposureIndex depreciated_installed_base(const std::vector<StarEvent>& events, double half_life_months,
                                         MonthIndex first, MonthIndex last) {
  if (!(half_life_months > 0.0)) throw InvalidArgument("half-life must be positive");
  if (last < first) throw InvalidArgument("exposure range is empty");
  ExposureIndex idx;
  idx.source = ExposureSource::DepreciatedInstalledBase;
  idx.half_life_months = half_life_months;
  idx.months = month_range(first, last);
  idx.value.assign(idx.months.size(), 0.0);

  // Accumulate by event month, then carry forward with one decay factor per month.
  const double monthly_decay = std::pow(0.5, 1.0 / half_life_months);
  std::vector<double> added(idx.months.size(), 0.0);
  double carried = 0.0;  // events before `first`, decayed to `first`
  for (const auto& e : events) {
    const int off = months_between(first, e.month);
    if (off < 0) {
      carried += e.stars_added * std::pow(0.5, static_cast<double>(-off) / half_life_months);
    } else if (static_cast<std::size_t>(off) < added.size()) {
      added[static_cast<std::size_t>(off)] += e.stars_added;
    }
  }
  double level = carried;
  for (std::size_t i = 0; i < idx.value.size(); ++i) {
    if (i > 0) level *= monthly_decay;
    level += added[i];
    idx.value[i] = level;
  }
  return idx;
}

ExposureIndex scale_range(const ExposureIndex& index, double lo, double hi) {
  if (!(hi > lo)) throw InvalidArgument("scale_range needs hi > lo");
  if (index.value.empty()) throw ConstantIndex("empty exposure index");
  const auto [mn, mx] = std::minmax_element(index.value.begin(), index.value.end());
  if (!(*mx > *mn)) throw ConstantIndex("exposure index is constant");
  ExposureIndex out = index;
  const double span = *mx - *mn;
  for (auto& v : out.value) v = lo + (hi - lo) * (v - *mn) / span;
  out.scale_range = std::make_pair(lo, hi);
  return out;
}

ExposureMerge merge_external(const MonthlyPanel& panel, const std::vector<MonthValue>& exposure) {
  ExposureMerge m;
  m.panel = panel;
  m.panel.exposure.assign(panel.size(), std::nullopt);
  for (const auto& mv : exposure) {
    if (auto pos = panel.position(mv.month)) m.panel.exposure[*pos] = mv.value;
  }
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (m.panel.exposure[i]) {
      ++m.covered;
    } else {
      m.uncovered.push_back(panel.months[i]);
    }
  }
  if (m.covered == 0) throw NoOverlap("exposure series does not overlap the panel months");
  return m;
}

ExposureMerge merge_external(const MonthlyPanel& panel, const ExposureIndex& index) {
  std::vector<MonthValue> series;
  series.reserve(index.months.size());
  for (std::size_t i = 0; i < index.months.size(); ++i) series.push_back({index.months[i], index.value[i]});
  return merge_external(panel, series);
}

ExposureRate exposure_adjusted_rate(const MonthlyPanel& panel, double per) {
  if (!(per > 0.0)) throw InvalidArgument("rate denominator must be positive");
  if (!panel.has_exposure()) throw MissingExposure("panel has no exposure column");
  ExposureRate out;
  out.per = per;
  double total_count = 0.0, total_exposure = 0.0;
  std::vector<double> position;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& e = panel.exposure[i];
    if (!e || !(*e > 0.0)) continue;
    out.months.push_back(panel.months[i]);
    out.rate.push_back(static_cast<double>(panel.raw_count[i]) / (*e / per));
    position.push_back(static_cast<double>(i));
    total_count += static_cast<double>(panel.raw_count[i]);
    total_exposure += *e;
  }
  if (out.rate.empty()) throw MissingExposure("no month has positive exposure");
  out.aggregate_rate = total_count / total_exposure * per;
  out.mean_monthly_rate = stats::mean(out.rate);
  if (out.rate.size() >= 3) out.trend = stats::simple_ols(position, out.rate);
  return out;
}

}  // namespace riskphase
