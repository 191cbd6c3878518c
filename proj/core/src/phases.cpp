#include "riskphase/phases.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

std::string_view to_string(SixPhase p) {
  switch (p) {
    case SixPhase::NoEvidencedOccurrence: return "No Evidenced Occurrence";
    case SixPhase::RareMitigated: return "Rare Mitigated";
    case SixPhase::RareOccurrence: return "Rare Occurrence";
    case SixPhase::EndemicMitigated: return "Endemic Mitigated";
    case SixPhase::RapidExpansion: return "Rapid Expansion";
    case SixPhase::EndemicUnmitigated: return "Endemic Unmitigated";
  }
  return "?";
}

std::string_view to_string(ThreePhase p) {
  switch (p) {
    case ThreePhase::DormantBaseline: return "Dormant Baseline";
    case ThreePhase::ActiveOutbreak: return "Active Outbreak";
    case ThreePhase::EndemicUnmitigated: return "Endemic Unmitigated";
  }
  return "?";
}

std::string_view to_string(PhaseFramework f) { return f == PhaseFramework::Six ? "six" : "three"; }

PhaseFramework parse_framework(std::string_view text) {
  if (text == "six" || text == "6") return PhaseFramework::Six;
  if (text == "three" || text == "3") return PhaseFramework::Three;
  throw InvalidArgument("unknown phase framework '" + std::string(text) + "'");
}

void PhaseThresholds::validate() const {
  if (!(theta_low < theta_high)) throw InvalidArgument("theta_low must be below theta_high");
  if (!(spc_sd > 0.0)) throw InvalidArgument("SPC baseline sd must be positive");
  if (!std::isfinite(trend_cut) || !std::isfinite(rapid_cut)) throw InvalidArgument("trend cuts must be finite");
}

std::pair<double, double> spc_baseline(std::span<const double> baseline) {
  if (baseline.size() < 2) throw WindowTooShort("SPC baseline needs at least two months");
  const double sd = stats::population_sd(baseline);
  if (!(sd > 0.0)) throw ZeroVariance("SPC baseline is constant");
  return {stats::mean(baseline), sd};
}

SixPhase classify_six(const MonthObservation& m, const PhaseThresholds& th) {
  if (!std::isfinite(m.count) || !std::isfinite(m.risk) || !std::isfinite(m.trend)) {
    throw InvalidArgument("classify_six: non-finite input");
  }
  const bool flat = m.trend <= th.trend_cut;
  if (m.count == 0.0) return SixPhase::NoEvidencedOccurrence;
  if (m.risk < th.theta_low && flat) return SixPhase::RareMitigated;
  if (m.risk < th.theta_low && !flat) return SixPhase::RareOccurrence;
  if (m.risk >= th.theta_low && m.risk < th.theta_high && flat) return SixPhase::EndemicMitigated;
  if (!flat) return SixPhase::RapidExpansion;
  if (m.risk >= th.theta_high && flat) return SixPhase::EndemicUnmitigated;
  throw Unclassifiable("no phase rule matched");
}

ThreePhase classify_three(const MonthObservation& m, const PhaseThresholds& th) {
  if (!std::isfinite(m.risk) || !std::isfinite(m.trend)) throw InvalidArgument("classify_three: non-finite input");
  if (m.risk >= th.spc_epidemic() || m.trend > th.rapid_cut) return ThreePhase::ActiveOutbreak;
  if (m.risk >= th.theta_low) return ThreePhase::EndemicUnmitigated;
  return ThreePhase::DormantBaseline;
}

std::pair<double, double> calibrate_thresholds(std::span<const double> reference) {
  if (reference.size() < 6) throw WindowTooShort("threshold calibration needs at least six reference months");
  const double m = stats::mean(reference);
  const double sd = stats::population_sd(reference);
  return {m + sd, m + 2.0 * sd};
}

double rapid_cut(std::span<const double> segment_slopes) {
  if (segment_slopes.empty()) return 0.05;
  return std::max(stats::quantile_type7(segment_slopes, 0.75), 0.05);
}

std::vector<PhaseShare> phase_distribution(std::span<const int> labels, int n_categories) {
  std::vector<PhaseShare> out(static_cast<std::size_t>(n_categories));
  for (int l : labels) {
    if (l < 0 || l >= n_categories) throw InvalidArgument("label out of range");
    ++out[static_cast<std::size_t>(l)].months;
  }
  for (auto& s : out) s.percent = labels.empty() ? 0.0 : 100.0 * s.months / static_cast<double>(labels.size());
  return out;
}

std::vector<std::vector<double>> transition_matrix(std::span<const int> labels, int n_categories) {
  const auto K = static_cast<std::size_t>(n_categories);
  std::vector<std::vector<double>> m(K, std::vector<double>(K, 0.0));
  for (std::size_t t = 1; t < labels.size(); ++t) {
    m[static_cast<std::size_t>(labels[t - 1])][static_cast<std::size_t>(labels[t])] += 1.0;
  }
  for (auto& row : m) {
    double s = 0.0;
    for (double v : row) s += v;
    if (s > 0.0) {
      for (double& v : row) v /= s;
    }
  }
  return m;
}

PhaseTimeline timeline_from_labels(std::vector<MonthIndex> months, std::vector<SixPhase> six,
                                   std::vector<ThreePhase> three, const PhaseThresholds& th) {
  PhaseTimeline tl;
  tl.months = std::move(months);
  tl.six_phase = std::move(six);
  tl.three_phase = std::move(three);
  tl.thresholds = th;
  std::vector<int> s6, s3;
  for (auto p : tl.six_phase) s6.push_back(static_cast<int>(p));
  for (auto p : tl.three_phase) s3.push_back(static_cast<int>(p));
  tl.six_distribution = phase_distribution(s6, kSixPhaseCount);
  tl.three_distribution = phase_distribution(s3, kThreePhaseCount);
  tl.six_transitions = transition_matrix(s6, kSixPhaseCount);
  tl.three_transitions = transition_matrix(s3, kThreePhaseCount);
  return tl;
}

PhaseTimeline timeline(const MonthlyPanel& panel, const RiskSeries& risk, const PhaseThresholds& th) {
  th.validate();
  std::vector<SixPhase> six;
  std::vector<ThreePhase> three;
  for (std::size_t i = 0; i < risk.size(); ++i) {
    const auto pos = panel.position(risk.months[i]);
    if (!pos) throw InvalidArgument("risk month " + risk.months[i].str() + " missing from panel");
    const MonthObservation obs{static_cast<double>(panel.raw_count[*pos]), risk.z[i], risk.slope[i]};
    six.push_back(classify_six(obs, th));
    three.push_back(classify_three(obs, th));
  }
  return timeline_from_labels(risk.months, std::move(six), std::move(three), th);
}

SegmentClassification classify_segments(const Segmentation& seg, const PhaseThresholds& th, PhaseFramework framework) {
  th.validate();
  SegmentClassification out;
  out.framework = framework;
  for (std::size_t k = 0; k < seg.segments.size(); ++k) {
    const auto& s = seg.segments[k];
    int phase = 0;
    if (framework == PhaseFramework::Six) {
      const double rate = s.mean_count.value_or(1.0);
      if (rate < th.segment_zero_rate) {
        phase = static_cast<int>(SixPhase::NoEvidencedOccurrence);
      } else {
        phase = static_cast<int>(classify_six({rate, s.mean, s.within_slope}, th));
      }
    } else {
      phase = static_cast<int>(classify_three({s.mean_count.value_or(1.0), s.mean, s.within_slope}, th));
    }
    out.segments.push_back({k, phase});
    out.month_labels.insert(out.month_labels.end(), s.n_months(), phase);
  }
  return out;
}

}  // namespace riskphase
