#include "riskphase/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

PhaseThresholds with_low(const PhaseThresholds& base, double theta_low) {
  PhaseThresholds th = base;
  th.theta_low = theta_low;
  if (th.theta_high <= theta_low) th.theta_high = theta_low + 1e-9 * (1.0 + std::abs(theta_low));
  return th;
}

std::vector<int> segment_labels(const Segmentation& seg, const PhaseThresholds& th, PhaseFramework fw) {
  return classify_segments(seg, th, fw).month_labels;
}

void fill_metrics(SweepRow& row, PhaseFramework fw) {
  const int K = fw == PhaseFramework::Six ? kSixPhaseCount : kThreePhaseCount;
  const auto dist = phase_distribution(row.labels, K);
  for (int k = 0; k < K; ++k) {
    const std::string name(fw == PhaseFramework::Six ? to_string(static_cast<SixPhase>(k))
                                                     : to_string(static_cast<ThreePhase>(k)));
    row.metrics[name + " %"] = dist[static_cast<std::size_t>(k)].percent;
  }
}

}  // namespace

SweepResult threshold_sweep(const Segmentation& seg, const PhaseThresholds& base, std::span<const double> grid,
                            PhaseFramework framework) {
  if (grid.empty()) throw EmptySweep("threshold sweep grid is empty");
  if (seg.segments.empty()) throw InvalidArgument("segmentation has no segments");
  SweepResult out;
  out.axis = "theta_low";
  out.grid.assign(grid.begin(), grid.end());
  for (double theta : grid) {
    SweepRow row;
    row.value = theta;
    row.labels = segment_labels(seg, with_low(base, theta), framework);
    row.n_segments = seg.segments.size();
    fill_metrics(row, framework);
    out.rows.push_back(std::move(row));
  }

  const auto [gmin, gmax] = std::minmax_element(grid.begin(), grid.end());
  const double lo = *gmin, hi = *gmax;
  if (lo == hi) {
    out.invariant_zones.push_back({lo, hi, false, false});
    return out;
  }
  // Labels can only change where theta crosses a segment risk.
  std::vector<double> cuts{lo};
  for (const auto& s : seg.segments) {
    if (s.mean > lo && s.mean < hi) cuts.push_back(s.mean);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  InvariantZone current{cuts[0], cuts[1], false, true};
  auto current_labels = segment_labels(seg, with_low(base, 0.5 * (cuts[0] + cuts[1])), framework);
  for (std::size_t i = 1; i + 1 < cuts.size(); ++i) {
    const auto labels = segment_labels(seg, with_low(base, 0.5 * (cuts[i] + cuts[i + 1])), framework);
    if (labels == current_labels) {
      current.hi = cuts[i + 1];
      continue;
    }
    out.invariant_zones.push_back(current);
    current = {cuts[i], cuts[i + 1], true, true};
    current_labels = labels;
  }
  current.hi_open = false;
  out.invariant_zones.push_back(current);
  return out;
}

TwoThresholdSweep two_threshold_sweep(std::span<const double> counts, const RiskSeries& risk,
                                      const PhaseThresholds& base, std::span<const double> grid_low,
                                      std::span<const double> grid_high) {
  if (grid_low.empty() || grid_high.empty()) throw EmptySweep("two-threshold grid is empty");
  if (counts.size() != risk.size()) throw InvalidArgument("counts and risk series differ in length");
  TwoThresholdSweep out;
  out.grid_low.assign(grid_low.begin(), grid_low.end());
  out.grid_high.assign(grid_high.begin(), grid_high.end());
  for (double lo : grid_low) {
    std::vector<std::optional<double>> row;
    for (double hi : grid_high) {
      if (!(lo < hi)) {
        row.push_back(std::nullopt);
        continue;
      }
      PhaseThresholds th = base;
      th.theta_low = lo;
      th.theta_high = hi;
      std::size_t eu = 0;
      for (std::size_t i = 0; i < risk.size(); ++i) {
        if (classify_six({counts[i], risk.z[i], risk.slope[i]}, th) == SixPhase::EndemicUnmitigated) ++eu;
      }
      row.push_back(risk.size() ? 100.0 * static_cast<double>(eu) / static_cast<double>(risk.size()) : 0.0);
    }
    out.pct_endemic_unmitigated.push_back(std::move(row));
  }
  // An axis is flat when moving along it never changes a defined cell.
  out.low_axis_flat = true;
  for (std::size_t j = 0; j < grid_high.size(); ++j) {
    std::optional<double> ref;
    for (std::size_t i = 0; i < grid_low.size(); ++i) {
      const auto& v = out.pct_endemic_unmitigated[i][j];
      if (!v) continue;
      if (ref && *ref != *v) out.low_axis_flat = false;
      ref = v;
    }
  }
  out.high_axis_flat = true;
  for (std::size_t i = 0; i < grid_low.size(); ++i) {
    std::optional<double> ref;
    for (std::size_t j = 0; j < grid_high.size(); ++j) {
      const auto& v = out.pct_endemic_unmitigated[i][j];
      if (!v) continue;
      if (ref && *ref != *v) out.high_axis_flat = false;
      ref = v;
    }
  }
  return out;
}

std::optional<std::size_t> main_break(const Segmentation& seg) {
  std::optional<std::size_t> best;
  double jump = -1.0;
  for (std::size_t k = 1; k < seg.segments.size(); ++k) {
    const double j = std::abs(seg.segments[k].mean - seg.segments[k - 1].mean);
    if (j > jump) {
      jump = j;
      best = seg.segments[k].start;
    }
  }
  return best;
}

BreakOutcome detect_break(const MonthlyPanel& panel, const BreakSettings& settings) {
  const auto fit = fit_count_model(panel, settings.formula, settings.family, settings.alpha);
  const auto excess = excess_risk(panel, fit, settings.epsilon, settings.slope_window);
  if (!excess.standardized) throw ConstantInput("excess risk is constant");
  BreakOutcome out;
  out.risk = *excess.standardized;
  const auto& z = out.risk.z;
  if (settings.fixed_penalty) {
    out.penalty = *settings.fixed_penalty;
  } else {
    const auto sweep = penalty_sweep(z, settings.penalty_grid);
    out.penalty = select_by_plateau(sweep);
  }
  std::vector<double> counts;
  for (const auto& m : out.risk.months) counts.push_back(static_cast<double>(panel.raw_count[*panel.position(m)]));
  out.segmentation = segment_stats(z, pelt_detect(z, out.penalty), counts);
  out.break_position = main_break(out.segmentation);
  if (out.break_position) {
    const auto pos = *out.break_position;
    out.break_month = out.risk.months[pos];
    out.before_mean = stats::mean(std::span<const double>(z).first(pos));
    out.after_mean = stats::mean(std::span<const double>(z).subspan(pos));
  } else {
    out.before_mean = out.after_mean = stats::mean(z);
  }
  return out;
}

namespace {

SweepRow break_row(double value, const BreakOutcome& b) {
  SweepRow row;
  row.value = value;
  row.break_month = b.break_month;
  row.n_segments = b.segmentation.segments.size();
  row.metrics["penalty"] = b.penalty;
  row.metrics["before_mean"] = b.before_mean;
  row.metrics["after_mean"] = b.after_mean;
  return row;
}

template <class Job>
SweepResult run_grid(std::string axis, std::span<const double> grid, Job job) {
  if (grid.empty()) throw EmptySweep(axis + " sweep grid is empty");
  SweepResult out;
  out.axis = std::move(axis);
  out.grid.assign(grid.begin(), grid.end());
  std::vector<std::future<BreakOutcome>> futures;
  for (double v : grid) futures.push_back(std::async(std::launch::async, job, v));
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      out.rows.push_back(break_row(grid[i], futures[i].get()));
    } catch (const Error& e) {
      SweepRow row;
      row.value = grid[i];
      row.error = e.what();
      out.rows.push_back(std::move(row));
    }
  }
  out.invariant_zones = grid_zones(out);
  return out;
}

}  // namespace

SweepResult halflife_sweep(const std::vector<StarEvent>& events, const MonthlyPanel& panel,
                           std::span<const double> halflives, const BreakSettings& settings) {
  if (panel.size() == 0) throw InvalidArgument("empty panel");
  return run_grid("half_life", halflives, [&](double hl) {
    auto index = depreciated_installed_base(events, hl, panel.months.front(), panel.months.back());
    if (settings.scale_exposure) index = scale_range(index);
    const auto merged = merge_external(panel, index);
    return detect_break(merged.panel, settings);
  });
}

SweepResult dispersion_sweep(const MonthlyPanel& panel, std::span<const double> alphas, const BreakSettings& settings) {
  return run_grid("alpha", alphas, [&](double a) {
    BreakSettings s = settings;
    s.family = CountFamily::NegBin;
    s.alpha = a;
    return detect_break(panel, s);
  });
}

std::vector<InvariantZone> grid_zones(const SweepResult& result) {
  std::vector<InvariantZone> zones;
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i <= result.rows.size(); ++i) {
    const bool boundary = i == result.rows.size() || !result.rows[i].error.empty() ||
                          (start && result.rows[i].break_month != result.rows[*start].break_month);
    if (boundary && start) {
      zones.push_back({result.rows[*start].value, result.rows[i - 1].value, false, false});
      start.reset();
    }
    if (i < result.rows.size() && result.rows[i].error.empty() && !start) start = i;
  }
  return zones;
}

}  // namespace riskphase
