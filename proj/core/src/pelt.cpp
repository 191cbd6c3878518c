#include "riskphase/pelt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

// Prefix sums of the centered signal; centering keeps Σx² - (Σx)²/n well
// conditioned for offsets far from zero.
class L2Cost {
 public:
  explicit L2Cost(std::span<const double> x) : sum_(x.size() + 1, 0.0), sq_(x.size() + 1, 0.0) {
    const double c = x.empty() ? 0.0 : stats::mean(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x[i] - c;
      sum_[i + 1] = sum_[i] + v;
      sq_[i + 1] = sq_[i] + v * v;
    }
  }

  // Cost of positions [s, t).
  double operator()(std::size_t s, std::size_t t) const {
    const double n = static_cast<double>(t - s);
    const double sm = sum_[t] - sum_[s];
    return std::max(0.0, (sq_[t] - sq_[s]) - sm * sm / n);
  }

 private:
  std::vector<double> sum_;
  std::vector<double> sq_;
};

struct Candidate {
  std::size_t pos;
  std::size_t expires;  // last end position at which it may still be used
};

}  // namespace

Segmentation pelt_detect(std::span<const double> signal, double penalty, std::size_t min_segment) {
  const std::size_t n = signal.size();
  if (min_segment < 1) throw InvalidArgument("min_segment must be >= 1");
  if (!(penalty > 0.0)) throw InvalidArgument("penalty must be positive");
  if (n < 2 * min_segment) {
    throw SeriesTooShort("series of length " + std::to_string(n) + " is shorter than 2 * min_segment");
  }
  for (double v : signal) {
    if (!std::isfinite(v)) throw InvalidArgument("signal contains non-finite values");
  }

  const L2Cost cost(signal);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNever = std::numeric_limits<std::size_t>::max();
  // best[t] = optimal penalized cost of positions [0, t), counting one
  // penalty per segment; best[0] = -penalty so k segments pay k-1 penalties.
  std::vector<double> best(n + 1, kInf);
  std::vector<std::size_t> last(n + 1, 0);
  best[0] = -penalty;

  std::vector<Candidate> candidates{{0, kNever}};
  std::vector<double> value;
  for (std::size_t t = min_segment; t <= n; ++t) {
    value.assign(candidates.size(), kInf);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto s = candidates[i].pos;
      if (t - s < min_segment || !std::isfinite(best[s])) continue;
      value[i] = best[s] + cost(s, t) + penalty;
      if (value[i] < best[t]) {
        best[t] = value[i];
        last[t] = s;
      }
    }
    // Pruning: if best[s] + C(s,t) >= best[t], then s is beaten through t at
    // every end point T with T - t >= min_segment. Closer end points may
    // still need s, so removal is deferred until then. The margin keeps
    // round-off from pruning a tie.
    const double margin = 1e-9 * (1.0 + std::fabs(best[t]));
    std::vector<Candidate> kept;
    kept.reserve(candidates.size() + 1);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      Candidate c = candidates[i];
      if (c.expires < t) continue;
      if (c.expires == kNever && std::isfinite(value[i]) && value[i] - penalty >= best[t] + margin) {
        c.expires = t + min_segment - 1;
      }
      kept.push_back(c);
    }
    if (t + min_segment <= n) kept.push_back({t, kNever});
    candidates.swap(kept);
  }

  std::vector<std::size_t> cps;
  for (std::size_t t = n; last[t] > 0; t = last[t]) cps.push_back(last[t]);
  std::reverse(cps.begin(), cps.end());
  Segmentation seg = make_segmentation(signal, std::move(cps), penalty);
  return seg;
}

double segmentation_cost(std::span<const double> signal, std::span<const std::size_t> changepoints, double penalty) {
  const L2Cost cost(signal);
  double total = 0.0;
  std::size_t s = 0;
  for (auto cp : changepoints) {
    total += cost(s, cp);
    s = cp;
  }
  total += cost(s, signal.size());
  return total + penalty * static_cast<double>(changepoints.size());
}

Segmentation make_segmentation(std::span<const double> signal, std::vector<std::size_t> changepoints, double penalty,
                               std::span<const double> counts) {
  Segmentation seg;
  seg.penalty = penalty;
  seg.changepoints = std::move(changepoints);
  std::size_t s = 0;
  for (std::size_t k = 0; k <= seg.changepoints.size(); ++k) {
    const std::size_t e = k < seg.changepoints.size() ? seg.changepoints[k] : signal.size();
    if (e <= s || e > signal.size()) throw InvalidArgument("changepoints must be strictly increasing and inside the series");
    Segment piece;
    piece.start = s;
    piece.end = e;
    seg.segments.push_back(piece);
    s = e;
  }
  Segmentation out = segment_stats(signal, seg, counts);
  out.total_cost = 0.0;
  for (const auto& piece : out.segments) out.total_cost += piece.cost;
  out.total_cost += penalty * static_cast<double>(out.changepoints.size());
  return out;
}

Segmentation segment_stats(std::span<const double> signal, const Segmentation& seg, std::span<const double> counts) {
  if (!counts.empty() && counts.size() != signal.size()) throw InvalidArgument("counts length must match the signal");
  Segmentation out = seg;
  for (auto& piece : out.segments) {
    const auto values = signal.subspan(piece.start, piece.n_months());
    piece.mean = stats::mean(values);
    piece.within_slope = stats::slope_against_index(values);
    double ss = 0.0;
    for (double v : values) ss += (v - piece.mean) * (v - piece.mean);
    piece.cost = ss;
    if (!counts.empty()) piece.mean_count = stats::mean(counts.subspan(piece.start, piece.n_months()));
  }
  return out;
}

std::string_view to_string(PenaltyLevel level) {
  switch (level) {
    case PenaltyLevel::Conservative: return "conservative";
    case PenaltyLevel::Moderate: return "moderate";
    case PenaltyLevel::Sensitive: return "sensitive";
    case PenaltyLevel::Exploratory: return "exploratory";
  }
  return "?";
}

PenaltyLevel parse_penalty_level(std::string_view text) {
  for (auto level : {PenaltyLevel::Conservative, PenaltyLevel::Moderate, PenaltyLevel::Sensitive, PenaltyLevel::Exploratory}) {
    if (text == to_string(level)) return level;
  }
  throw InvalidArgument("unknown penalty level '" + std::string(text) + "'");
}

double penalty_multiplier(PenaltyLevel level) {
  switch (level) {
    case PenaltyLevel::Conservative: return 3.0;
    case PenaltyLevel::Moderate: return 2.0;
    case PenaltyLevel::Sensitive: return 1.0;
    case PenaltyLevel::Exploratory: return 0.5;
  }
  return 1.0;
}

double penalty_formula(PenaltyLevel level, std::size_t n, double variance) {
  if (n < 2) throw InvalidArgument("penalty formula needs n >= 2");
  if (!(variance > 0.0)) throw InvalidArgument("penalty formula needs positive variance");
  return penalty_multiplier(level) * std::log(static_cast<double>(n)) * variance;
}

PenaltySweep penalty_sweep(std::span<const double> signal, std::span<const double> grid, std::size_t min_segment) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw InvalidArgument("penalty grid must be ascending");
  PenaltySweep sweep;
  sweep.grid.assign(grid.begin(), grid.end());
  for (double rho : grid) {
    const auto seg = pelt_detect(signal, rho, min_segment);
    sweep.segment_counts.push_back(seg.segments.size());
    sweep.changepoints.push_back(seg.changepoints);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!sweep.plateaus.empty() && sweep.plateaus.back().n_segments == sweep.segment_counts[i]) {
      sweep.plateaus.back().appearances += 1;
      sweep.plateaus.back().rho_hi = grid[i];
    } else {
      sweep.plateaus.push_back({sweep.segment_counts[i], 1, grid[i], grid[i]});
    }
  }
  return sweep;
}

const Plateau& widest_plateau(const PenaltySweep& sweep) {
  if (sweep.plateaus.empty()) throw EmptySweep("penalty sweep has no plateaus");
  const Plateau* best = &sweep.plateaus.front();
  for (const auto& p : sweep.plateaus) {
    if (p.appearances > best->appearances ||
        (p.appearances == best->appearances && p.n_segments < best->n_segments)) {
      best = &p;
    }
  }
  return *best;
}

double select_by_plateau(const PenaltySweep& sweep) {
  const Plateau& p = widest_plateau(sweep);
  return 0.5 * (p.rho_lo + p.rho_hi);
}

std::vector<double> default_penalty_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.5 * i);
  return grid;
}

}  // namespace riskphase
