#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "riskphase/pelt.hpp"
#include "riskphase/series.hpp"

namespace riskphase {

enum class SixPhase {
  NoEvidencedOccurrence,
  RareMitigated,
  RareOccurrence,
  EndemicMitigated,
  RapidExpansion,
  EndemicUnmitigated,
};
inline constexpr int kSixPhaseCount = 6;

enum class ThreePhase { DormantBaseline, ActiveOutbreak, EndemicUnmitigated };
inline constexpr int kThreePhaseCount = 3;

enum class PhaseFramework { Six, Three };

std::string_view to_string(SixPhase p);
std::string_view to_string(ThreePhase p);
std::string_view to_string(PhaseFramework f);
PhaseFramework parse_framework(std::string_view text);

struct PhaseThresholds {
  double theta_low = -0.3;
  double theta_high = 0.3;
  double trend_cut = 0.05;
  double rapid_cut = 0.05;  // three-phase outbreak slope
  double spc_mean = 0.0;    // baseline-window mean of the risk signal
  double spc_sd = 1.0;      // baseline-window sd (> 0)
  double segment_zero_rate = 0.5;  // segment mean count below this is "no evidence"

  double spc_epidemic() const { return spc_mean + 2.0 * spc_sd; }
  double spc_acute() const { return spc_mean + 3.0 * spc_sd; }

  /// Throws InvalidArgument unless theta_low < theta_high and spc_sd > 0.
  void validate() const;
};

/// SPC mean and population sd over a baseline window.
std::pair<double, double> spc_baseline(std::span<const double> baseline);

struct MonthObservation {
  double count = 0.0;
  double risk = 0.0;   // standardized risk r
  double trend = 0.0;  // local slope tau
};

/// First matching row in table order; RareOccurrence precedes RapidExpansion.
SixPhase classify_six(const MonthObservation& m, const PhaseThresholds& th);
/// Outbreak at or above the SPC epidemic limit or with slope above rapid_cut;
/// endemic at or above theta_low; dormant otherwise.
ThreePhase classify_three(const MonthObservation& m, const PhaseThresholds& th);

/// theta_low = mean + sd, theta_high = mean + 2 sd (population sd) over the
/// reference months. Throws WindowTooShort below six months.
std::pair<double, double> calibrate_thresholds(std::span<const double> reference);

/// max(P75(slopes), 0.05) with type-7 interpolation; 0.05 for no slopes.
double rapid_cut(std::span<const double> segment_slopes);

struct PhaseShare {
  int months = 0;
  double percent = 0.0;
};

/// Label histogram as counts and percentages.
std::vector<PhaseShare> phase_distribution(std::span<const int> labels, int n_categories);
/// Row-normalized adjacent-pair counts; rows without departures stay zero.
std::vector<std::vector<double>> transition_matrix(std::span<const int> labels, int n_categories);

struct PhaseTimeline {
  std::vector<MonthIndex> months;
  std::vector<SixPhase> six_phase;
  std::vector<ThreePhase> three_phase;
  PhaseThresholds thresholds;
  std::vector<PhaseShare> six_distribution;
  std::vector<PhaseShare> three_distribution;
  std::vector<std::vector<double>> six_transitions;
  std::vector<std::vector<double>> three_transitions;
};

/// Month-level labels for every month of `risk`; counts come from the panel's
/// raw counts.
PhaseTimeline timeline(const MonthlyPanel& panel, const RiskSeries& risk, const PhaseThresholds& th);

/// Builds distributions and transitions for explicit label sequences.
PhaseTimeline timeline_from_labels(std::vector<MonthIndex> months, std::vector<SixPhase> six,
                                   std::vector<ThreePhase> three, const PhaseThresholds& th);

struct SegmentPhase {
  std::size_t segment = 0;
  int phase = 0;  // SixPhase or ThreePhase as int, per framework
};

struct SegmentClassification {
  PhaseFramework framework = PhaseFramework::Three;
  std::vector<SegmentPhase> segments;
  std::vector<int> month_labels;  // segment phase expanded to months
};

/// Segment-level phases from mean risk and within-segment slope. In the
/// six-phase framework a segment whose mean count is below
/// `segment_zero_rate` is NoEvidencedOccurrence.
SegmentClassification classify_segments(const Segmentation& seg, const PhaseThresholds& th, PhaseFramework framework);

}  // namespace riskphase
