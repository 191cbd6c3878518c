#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskphase/exposure.hpp"
#include "riskphase/glm.hpp"
#include "riskphase/pelt.hpp"
#include "riskphase/phases.hpp"

namespace riskphase {

struct InvariantZone {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = true;
  bool hi_open = true;
};

struct SweepRow {
  double value = 0.0;
  std::map<std::string, double> metrics;
  std::vector<int> labels;  // per-month (or per-segment) classification
  std::optional<MonthIndex> break_month;
  std::size_t n_segments = 0;
  std::string error;
};

struct SweepResult {
  std::string axis;
  std::vector<double> grid;
  std::vector<SweepRow> rows;
  std::vector<InvariantZone> invariant_zones;
};

/// Segment classification per theta_low. Zones are the maximal open intervals
/// between flip points inside the grid hull; the hull ends are closed.
SweepResult threshold_sweep(const Segmentation& seg, const PhaseThresholds& base, std::span<const double> grid,
                            PhaseFramework framework);

struct TwoThresholdSweep {
  std::vector<double> grid_low;
  std::vector<double> grid_high;
  std::vector<std::vector<std::optional<double>>> pct_endemic_unmitigated;  // [low][high]; empty when low >= high
  bool low_axis_flat = false;
  bool high_axis_flat = false;
};

/// Month-level six-phase reclassification per (theta_low, theta_high) cell.
TwoThresholdSweep two_threshold_sweep(std::span<const double> counts, const RiskSeries& risk,
                                      const PhaseThresholds& base, std::span<const double> grid_low,
                                      std::span<const double> grid_high);

struct BreakSettings {
  CountFormula formula{true, true, false, true};
  CountFamily family = CountFamily::NegBin;
  double alpha = 1.0;
  double epsilon = 0.5;
  int slope_window = 3;
  std::vector<double> penalty_grid = default_penalty_grid();
  std::optional<double> fixed_penalty;
  bool scale_exposure = true;  // map the installed base onto [10, 100]
};

struct BreakOutcome {
  RiskSeries risk;
  Segmentation segmentation;
  double penalty = 0.0;
  std::optional<std::size_t> break_position;
  std::optional<MonthIndex> break_month;
  double before_mean = 0.0;
  double after_mean = 0.0;
};

/// The changepoint with the largest absolute jump in adjacent segment means.
std::optional<std::size_t> main_break(const Segmentation& seg);

/// GLM -> excess risk -> PELT at the plateau penalty (or the fixed one).
BreakOutcome detect_break(const MonthlyPanel& panel, const BreakSettings& settings);

/// Rebuilds exposure per half-life and re-runs the break detection.
SweepResult halflife_sweep(const std::vector<StarEvent>& events, const MonthlyPanel& panel,
                           std::span<const double> halflives, const BreakSettings& settings);

/// Re-runs GLM + PELT per NB dispersion value.
SweepResult dispersion_sweep(const MonthlyPanel& panel, std::span<const double> alphas, const BreakSettings& settings);

/// Groups consecutive grid rows with equal break month into closed zones.
std::vector<InvariantZone> grid_zones(const SweepResult& result);

}  // namespace riskphase
