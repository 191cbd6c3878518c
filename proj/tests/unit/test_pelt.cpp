#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "riskphase/errors.hpp"
#include "riskphase/pelt.hpp"
#include "support.hpp"

#include "oracles.hpp"

using namespace riskphase;
using namespace testing;

TEST_CASE("pelt reaches the exhaustive optimum on random series") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(4, 40);
  std::uniform_real_distribution<double> pen(0.2, 8.0);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = static_cast<std::size_t>(len(rng));
    auto x = testing::gaussian(n, 0.0, 1.0, rng);
    for (std::size_t i = n / 2; i < n; ++i) x[i] += (rep % 3) * 1.5;
    const double beta = pen(rng);
    const std::size_t ms = 1 + static_cast<std::size_t>(rep % 3);
    if (n < 2 * ms) continue;
    const auto seg = pelt_detect(x, beta, ms);
    const double want = exhaustive_optimum(x, beta, ms);
    CHECK(seg.total_cost == doctest::Approx(want).epsilon(1e-9));
    CHECK(segmentation_cost(x, seg.changepoints, beta) == doctest::Approx(want).epsilon(1e-9));
    for (const auto& s : seg.segments) CHECK(s.n_months() >= ms);
  }
}

TEST_CASE("clean step is located exactly") {
  std::vector<double> x(30, 0.0);
  for (std::size_t i = 12; i < 30; ++i) x[i] = 3.0;
  const auto seg = pelt_detect(x, 1.0);
  REQUIRE(seg.changepoints.size() == 1);
  CHECK(seg.changepoints[0] == 12);
  CHECK(seg.segments[1].mean == doctest::Approx(3.0));
}

TEST_CASE("segment stats carry mean counts and slopes") {
  const std::vector<double> x{0, 1, 2, 3, 10, 10, 10};
  const std::vector<double> counts{1, 1, 1, 1, 4, 6, 8};
  const auto seg = make_segmentation(x, {4}, 1.0, counts);
  REQUIRE(seg.segments.size() == 2);
  CHECK(seg.segments[0].within_slope == doctest::Approx(1.0));
  CHECK(seg.segments[1].mean_count.value() == doctest::Approx(6.0));
  CHECK(seg.segments[0].cost == doctest::Approx(5.0));
}

TEST_CASE("penalty levels scale ln(n) times the variance") {
  CHECK(penalty_formula(PenaltyLevel::Exploratory, 128, 1.0) == doctest::Approx(0.5 * std::log(128.0)));
  CHECK(penalty_formula(PenaltyLevel::Exploratory, 128, 1.0) == doctest::Approx(2.43).epsilon(0.01 / 2.43));
  CHECK(penalty_formula(PenaltyLevel::Conservative, 100, 2.0) == doctest::Approx(6.0 * std::log(100.0)));
  CHECK(parse_penalty_level("moderate") == PenaltyLevel::Moderate);
}

TEST_CASE("plateau selection takes the longest run of equal segment counts") {
  std::mt19937_64 rng(5);
  auto x = testing::gaussian(90, 0.0, 0.4, rng);
  for (std::size_t i = 30; i < 60; ++i) x[i] += 2.0;
  const auto sweep = penalty_sweep(x, default_penalty_grid());
  CHECK(sweep.grid.size() == 20);
  std::size_t covered = 0;
  for (const auto& p : sweep.plateaus) covered += p.appearances;
  CHECK(covered == sweep.grid.size());
  const auto& w = widest_plateau(sweep);
  for (const auto& p : sweep.plateaus) CHECK(p.appearances <= w.appearances);
  CHECK(w.n_segments == 3);
  CHECK(select_by_plateau(sweep) == doctest::Approx((w.rho_lo + w.rho_hi) / 2));
  for (std::size_t i = 1; i < sweep.segment_counts.size(); ++i) {
    CHECK(sweep.segment_counts[i] <= sweep.segment_counts[i - 1]);
  }
}

TEST_CASE("too-short series throw") {
  const std::vector<double> x{1, 2, 3};
  CHECK_THROWS_AS(pelt_detect(x, 1.0, 2), SeriesTooShort);
}
