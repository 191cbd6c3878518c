#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "riskphase/delay.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

using namespace riskphase;

namespace {

std::vector<double> lognormal_lags(std::size_t n, double mu, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> d(mu, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = d(rng);
  return out;
}

}  // namespace

TEST_CASE("lognormal MLE equals the moments of log lags") {
  const auto lags = lognormal_lags(500, 3.0, 0.8, 1);
  std::vector<double> logs;
  for (double v : lags) logs.push_back(std::log(v));
  const auto m = fit_delay(lags, DelayFamily::Lognormal);
  CHECK(m.param1 == doctest::Approx(stats::mean(logs)).epsilon(1e-10));
  CHECK(m.param2 == doctest::Approx(stats::population_sd(logs)).epsilon(1e-10));
  CHECK(m.aic == doctest::Approx(4.0 - 2.0 * m.loglik));
}

TEST_CASE("exponential MLE rate is the reciprocal mean") {
  const auto lags = lognormal_lags(300, 2.0, 0.5, 2);
  const auto m = fit_delay(lags, DelayFamily::Exponential);
  CHECK(m.param1 == doctest::Approx(1.0 / stats::mean(lags)).epsilon(1e-12));
  CHECK(m.model_mean() == doctest::Approx(stats::mean(lags)).epsilon(1e-12));
}

TEST_CASE("weibull MLE satisfies the profile score equation") {
  std::mt19937_64 rng(3);
  std::weibull_distribution<double> w(1.7, 25.0);
  std::vector<double> lags(400);
  for (auto& v : lags) v = w(rng);
  const auto m = fit_delay(lags, DelayFamily::Weibull);
  const double k = m.param1;
  double s0 = 0, s1 = 0, sl = 0;
  for (double x : lags) {
    s0 += std::pow(x, k);
    s1 += std::pow(x, k) * std::log(x);
    sl += std::log(x);
  }
  const double n = static_cast<double>(lags.size());
  // d/dk profile loglik = 0  <=>  s1/s0 - 1/k - mean(log x) = 0
  CHECK(std::abs(s1 / s0 - 1.0 / k - sl / n) < 1e-6);
  CHECK(m.param2 == doctest::Approx(std::pow(s0 / n, 1.0 / k)).epsilon(1e-8));
  CHECK(k == doctest::Approx(1.7).epsilon(0.12));
}

TEST_CASE("selection prefers the generating lognormal") {
  const auto lags = lognormal_lags(800, 3.2, 1.0, 4);
  const auto sel = select_delay_model(lags);
  CHECK(sel.best.family == DelayFamily::Lognormal);
  REQUIRE(sel.candidates.size() == 3);
  for (const auto& c : sel.candidates) CHECK(sel.best.aic <= c.aic);
}

TEST_CASE("zero-day lags are shifted, too few lags throw") {
  std::vector<double> lags{0, 0, 1, 2, 3, 5, 8, 13, 21, 34, 55};
  const auto m = fit_delay(lags, DelayFamily::Lognormal);
  CHECK(m.n_shifted == 2);
  const std::vector<double> few{1, 2, 3};
  CHECK_THROWS_AS(fit_delay(few, DelayFamily::Lognormal), InsufficientData);
  DelayFitOptions raw;
  raw.zero_shift = 0.0;
  CHECK_THROWS_AS(fit_delay(lags, DelayFamily::Lognormal, raw), NonPositiveLag);
}

TEST_CASE("nowcast window and inflation from the empirical lag cdf") {
  // 10 lags: 0,0,0,0,0,1,1,1,2,3 months
  const std::vector<int> months{0, 0, 0, 0, 0, 1, 1, 1, 2, 3};
  const auto adj = build_nowcast(months, 0.95, 5.0);
  CHECK(adj.window_months == 3);
  REQUIRE(adj.cdf.size() == 4);
  CHECK(adj.cdf[0] == doctest::Approx(0.5));
  CHECK(adj.cdf[2] == doctest::Approx(0.9));
  CHECK(adj.inflation(0) == doctest::Approx(2.0));
  CHECK(adj.inflation(1) == doctest::Approx(1.25));
  CHECK(adj.inflation(4) == 1.0);
  const auto capped = build_nowcast(months, 0.95, 1.5);
  CHECK(capped.inflation(0) == 1.5);
  CHECK(lags_to_months(std::vector<double>{0, 30.43, 30.44, 91.0}) == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("apply_nowcast inflates only the trailing window") {
  MonthlyPanel p;
  p.months = month_range(MonthIndex{2020, 1}, MonthIndex{2020, 6});
  p.raw_count = {10, 10, 10, 10, 10, 10};
  p.nowcast_count = {10, 10, 10, 10, 10, 10};
  const std::vector<int> months{0, 0, 0, 0, 0, 1, 1, 1, 2, 3};
  const auto adj = build_nowcast(months);
  const auto out = apply_nowcast(p, adj, MonthIndex{2020, 6});
  CHECK(out.nowcast_count[5] == doctest::Approx(20.0));
  CHECK(out.nowcast_count[4] == doctest::Approx(12.5));
  CHECK(out.nowcast_count[1] == 10.0);
  CHECK(out.raw_count == p.raw_count);
  CHECK_THROWS_AS(apply_nowcast(p, adj, MonthIndex{2020, 5}), InvalidArgument);
}
