#include <cmath>
#include <numeric>

#include "doctest.h"
#include "riskphase/errors.hpp"
#include "riskphase/pelt.hpp"
#include "riskphase/phases.hpp"

#include "oracles.hpp"

using namespace riskphase;
using namespace testing;

namespace {

PhaseThresholds df_thresholds() {
  PhaseThresholds th;
  th.theta_low = 0.14;
  th.theta_high = 0.54;
  th.spc_mean = 0.0;
  th.spc_sd = 1.0;
  return th;
}

}  // namespace

TEST_CASE("calibration is mean plus one and two population sds") {
  const std::vector<double> ref{-0.66, 0.14, -0.66, 0.14, -0.66, 0.14};
  const auto [lo, hi] = calibrate_thresholds(ref);
  CHECK(lo == doctest::Approx(0.14).epsilon(1e-12));
  CHECK(hi == doctest::Approx(0.54).epsilon(1e-12));
  const std::vector<double> unit{-1, 1, -1, 1, -1, 1};
  const auto [a, b] = calibrate_thresholds(unit);
  CHECK(a == doctest::Approx(1.0));
  CHECK(b == doctest::Approx(2.0));
  const std::vector<double> short_ref{0, 1, 2};
  CHECK_THROWS_AS(calibrate_thresholds(short_ref), WindowTooShort);
}

TEST_CASE("rapid cut floors at 0.05") {
  const std::vector<double> df{0.005, 0.027, -0.009};
  CHECK(rapid_cut(df) == 0.05);
  const std::vector<double> steep{0.2, 0.2, 0.2};
  CHECK(rapid_cut(steep) == doctest::Approx(0.2));
  CHECK(rapid_cut(std::span<const double>{}) == 0.05);
}

TEST_CASE("six-phase rules are total and follow table order") {
  const auto th = df_thresholds();
  const double e = 1e-9;
  const std::vector<double> rs{-1e6, th.theta_low - e, th.theta_low, th.theta_low + e, th.theta_high - e,
                               th.theta_high, th.theta_high + e, 1e6};
  const std::vector<double> taus{-1e6, 0.05 - e, 0.05, 0.05 + e, 1e6};
  int cells = 0;
  for (double count : {0.0, 1.0}) {
    for (double r : rs) {
      for (double tau : taus) {
        const auto got = classify_six({count, r, tau}, th);
        CHECK(got == six_phase_oracle(count, r, tau, th.theta_low, th.theta_high));
        ++cells;
      }
    }
  }
  CHECK(cells == 80);
  CHECK(classify_six({1, th.theta_low - 0.1, 0.2}, th) == SixPhase::RareOccurrence);
  CHECK(classify_six({1, th.theta_high + 0.1, 0.0}, th) == SixPhase::EndemicUnmitigated);
  CHECK(classify_six({0, 5.0, 5.0}, th) == SixPhase::NoEvidencedOccurrence);
}

TEST_CASE("flat-trend labels rise monotonically with risk") {
  const auto th = df_thresholds();
  auto rank = [](SixPhase p) {
    switch (p) {
      case SixPhase::RareMitigated: return 0;
      case SixPhase::EndemicMitigated: return 1;
      case SixPhase::EndemicUnmitigated: return 2;
      default: return -1;
    }
  };
  int prev = 0;
  for (double r = -2; r <= 2; r += 0.01) {
    const int k = rank(classify_six({1, r, 0.0}, th));
    REQUIRE(k >= 0);
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("three-phase outbreak, endemic, dormant") {
  auto th = df_thresholds();
  th.rapid_cut = 0.05;
  CHECK(classify_three({1, 0.43, -0.009}, th) == ThreePhase::EndemicUnmitigated);
  CHECK(classify_three({1, 2.5, 0.0}, th) == ThreePhase::ActiveOutbreak);
  CHECK(classify_three({1, -0.83, 0.0}, th) == ThreePhase::DormantBaseline);
  CHECK(classify_three({1, -0.83, 0.3}, th) == ThreePhase::ActiveOutbreak);
  CHECK(classify_three({1, 2.0, 0.0}, th) == ThreePhase::ActiveOutbreak);
}

TEST_CASE("distribution and transition matrix from labels") {
  const std::vector<int> alt{0, 1, 0, 1, 0, 1};
  const auto m = transition_matrix(alt, 3);
  CHECK(m[0][1] == 1.0);
  CHECK(m[1][0] == 1.0);
  CHECK(m[2][0] + m[2][1] + m[2][2] == 0.0);
  const std::vector<int> same(5, 2);
  CHECK(transition_matrix(same, 3)[2][2] == 1.0);
  const std::vector<int> mixed{0, 0, 2, 2, 2, 1, 0};
  const auto d = phase_distribution(mixed, 3);
  CHECK(d[2].months == 3);
  double pct = 0;
  for (const auto& s : d) pct += s.percent;
  CHECK(pct == doctest::Approx(100.0));
}

TEST_CASE("segment classification of the three-segment deepfake profile") {
  std::vector<double> z;
  std::vector<double> counts;
  z.insert(z.end(), 40, -0.05);
  z.insert(z.end(), 20, -0.83);
  z.insert(z.end(), 43, 0.43);
  counts.insert(counts.end(), 40, 0.2);
  counts.insert(counts.end(), 20, 0.3);
  counts.insert(counts.end(), 43, 6.5);
  const auto seg = make_segmentation(z, {40, 60}, 3.0, counts);
  const auto th = df_thresholds();
  const auto three = classify_segments(seg, th, PhaseFramework::Three);
  const auto d3 = phase_distribution(three.month_labels, kThreePhaseCount);
  CHECK(d3[0].months == 60);
  CHECK(d3[2].months == 43);
  CHECK(d3[0].percent == doctest::Approx(58.25).epsilon(1e-3));
  const auto six = classify_segments(seg, th, PhaseFramework::Six);
  CHECK(six.segments[0].phase == static_cast<int>(SixPhase::NoEvidencedOccurrence));
  CHECK(six.segments[2].phase == static_cast<int>(SixPhase::EndemicMitigated));
}

TEST_CASE("timeline labels every risk month") {
  MonthlyPanel p;
  p.months = month_range({2020, 1}, {2020, 8});
  p.raw_count = {0, 1, 2, 3, 4, 5, 6, 7};
  p.nowcast_count = {0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> raw{-1, -0.5, 0, 0.5, 1, 1.5, 1.5, 1.4};
  const auto risk = make_risk_series(p.months, raw);
  const auto tl = timeline(p, risk, df_thresholds());
  CHECK(tl.six_phase.size() == 8);
  CHECK(tl.six_phase[0] == SixPhase::NoEvidencedOccurrence);
  int total = 0;
  for (const auto& s : tl.three_distribution) total += s.months;
  CHECK(total == 8);
}
