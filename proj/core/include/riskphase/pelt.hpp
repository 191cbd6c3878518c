#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace riskphase {

struct Segment {
  std::size_t start = 0;  // inclusive position
  std::size_t end = 0;    // exclusive position
  std::size_t n_months() const { return end - start; }
  double mean = 0.0;
  double within_slope = 0.0;  // OLS slope per position
  std::optional<double> mean_count;
  double cost = 0.0;  // sum of squared deviations from the segment mean
};

struct Segmentation {
  double penalty = 0.0;
  std::vector<std::size_t> changepoints;  // start positions of segments 2..k
  std::vector<Segment> segments;
  double total_cost = 0.0;  // sum of segment costs + penalty * #changepoints
};

/// Penalized L2 segmentation, globally optimal; every segment has at least
/// `min_segment` points. Throws SeriesTooShort when n < 2 * min_segment.
Segmentation pelt_detect(std::span<const double> signal, double penalty, std::size_t min_segment = 2);

/// L2 cost of an explicit segmentation plus the penalty term.
double segmentation_cost(std::span<const double> signal, std::span<const std::size_t> changepoints, double penalty);

/// Recomputes per-segment mean, OLS slope and (optionally) mean count.
Segmentation segment_stats(std::span<const double> signal, const Segmentation& seg,
                           std::span<const double> counts = {});

/// Builds a Segmentation (with stats) from explicit changepoints.
Segmentation make_segmentation(std::span<const double> signal, std::vector<std::size_t> changepoints, double penalty,
                               std::span<const double> counts = {});

enum class PenaltyLevel { Conservative, Moderate, Sensitive, Exploratory };

std::string_view to_string(PenaltyLevel level);
PenaltyLevel parse_penalty_level(std::string_view text);
double penalty_multiplier(PenaltyLevel level);

/// multiplier * ln(n) * variance with multipliers 3.0 / 2.0 / 1.0 / 0.5.
double penalty_formula(PenaltyLevel level, std::size_t n, double variance);

struct Plateau {
  std::size_t n_segments = 0;
  std::size_t appearances = 0;  // grid points in the run
  double rho_lo = 0.0;
  double rho_hi = 0.0;
};

struct PenaltySweep {
  std::vector<double> grid;
  std::vector<std::size_t> segment_counts;
  std::vector<std::vector<std::size_t>> changepoints;
  std::vector<Plateau> plateaus;  // consecutive runs of equal segment count
};

/// Grid must be ascending and positive.
PenaltySweep penalty_sweep(std::span<const double> signal, std::span<const double> grid, std::size_t min_segment = 2);

/// Plateau with the most appearances; ties go to fewer segments.
const Plateau& widest_plateau(const PenaltySweep& sweep);

/// Midpoint of the widest plateau's penalty range. Throws EmptySweep.
double select_by_plateau(const PenaltySweep& sweep);

/// Default sweep grid 0.5, 1.0, ..., 10.0.
std::vector<double> default_penalty_grid();

}  // namespace riskphase
