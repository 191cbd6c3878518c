#include <cmath>

#include "doctest.h"
#include "riskphase/errors.hpp"
#include "riskphase/exposure.hpp"

using namespace riskphase;

TEST_CASE("depreciated installed base against a direct sum") {
  const std::vector<StarEvent> ev{{"a", {2020, 1}, 100}, {"b", {2020, 3}, 40}, {"a", {2020, 4}, 10}};
  const auto idx = depreciated_installed_base(ev, 2.0, {2020, 1}, {2020, 6});
  REQUIRE(idx.value.size() == 6);
  for (int t = 0; t < 6; ++t) {
    const MonthIndex m = MonthIndex{2020, 1}.plus(t);
    double want = 0;
    for (const auto& e : ev) {
      const int age = months_between(e.month, m);
      if (age >= 0) want += e.stars_added * std::pow(0.5, age / 2.0);
    }
    CHECK(idx.value[t] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(idx.source == ExposureSource::DepreciatedInstalledBase);
}

TEST_CASE("min-max scaling onto [10, 100]") {
  ExposureIndex e;
  e.months = month_range({2020, 1}, {2020, 3});
  e.value = {2, 4, 6};
  const auto s = scale_range(e);
  CHECK(s.value == std::vector<double>{10, 55, 100});
  e.value = {1, 1, 1};
  CHECK_THROWS_AS(scale_range(e), ConstantIndex);
}

TEST_CASE("external merge records uncovered months and rate skips them") {
  MonthlyPanel p;
  p.months = month_range({2020, 1}, {2020, 4});
  p.raw_count = {2, 4, 6, 8};
  p.nowcast_count = {2, 4, 6, 8};
  const auto m = merge_external(p, {{{2020, 2}, 2e6}, {{2020, 3}, 3e6}, {{2020, 4}, 4e6}, {{2021, 1}, 1}});
  CHECK(m.covered == 3);
  REQUIRE(m.uncovered.size() == 1);
  CHECK(m.uncovered[0] == MonthIndex{2020, 1});
  const auto r = exposure_adjusted_rate(m.panel);
  CHECK(r.rate == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(r.aggregate_rate == doctest::Approx(18.0 / 9.0));
  REQUIRE(r.trend);
  CHECK(r.trend->slope == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(merge_external(p, {{{2019, 1}, 5.0}}), NoOverlap);
}
