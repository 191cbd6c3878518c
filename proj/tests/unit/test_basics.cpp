#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "riskphase/csv.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/month.hpp"
#include "riskphase/series.hpp"
#include "riskphase/stats.hpp"
#include "support.hpp"

using namespace riskphase;

TEST_CASE("month arithmetic round-trips through ordinals") {
  const MonthIndex m{2017, 3};
  CHECK(m.plus(102) == MonthIndex{2025, 9});
  CHECK(m.plus(-3) == MonthIndex{2016, 12});
  CHECK(months_between(m, MonthIndex{2022, 3}) == 60);
  CHECK(MonthIndex::parse("2022-03-17") == MonthIndex{2022, 3});
  CHECK(MonthIndex::parse("2022-03").str() == "2022-03");
  CHECK(month_range(MonthIndex{2020, 11}, MonthIndex{2021, 2}).size() == 4);
  CHECK_THROWS_AS(MonthIndex::parse("2022-13"), ParseError);
  for (int ord = -30; ord < 30; ++ord) CHECK(MonthIndex::from_ordinal(ord).ordinal() == ord);
}

TEST_CASE("dates") {
  const Date a = parse_date("2020-02-28");
  const Date b = parse_date("2020-03-01");
  CHECK(days_between(a, b) == 2);
  CHECK(format_date(b) == "2020-03-01");
  CHECK(month_of(b) == MonthIndex{2020, 3});
  CHECK_THROWS_AS(parse_date("2020-02-30"), ParseError);
}

TEST_CASE("population and sample variance") {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(stats::mean(x) == doctest::Approx(5.0));
  CHECK(stats::population_variance(x) == doctest::Approx(4.0));
  CHECK(stats::sample_variance(x) == doctest::Approx(32.0 / 7.0));
  CHECK(stats::population_sd(x) == doctest::Approx(2.0));
}

TEST_CASE("type-7 quantile matches hand interpolation") {
  const std::vector<double> x{4, 1, 3, 2};
  // sorted 1 2 3 4; h = (n-1)p = 2.25 -> 3 + 0.25 * (4 - 3)
  CHECK(stats::quantile_type7(x, 0.75) == doctest::Approx(3.25));
  CHECK(stats::quantile_type7(x, 0.0) == doctest::Approx(1.0));
  CHECK(stats::quantile_type7(x, 1.0) == doctest::Approx(4.0));
  const std::vector<double> slopes{0.005, 0.027, -0.009};
  CHECK(stats::quantile_type7(slopes, 0.75) == doctest::Approx(0.016));
}

TEST_CASE("simple OLS against the closed form") {
  std::mt19937_64 rng(11);
  const auto noise = testing::gaussian(40, 0.0, 0.5, rng);
  std::vector<double> x(40), y(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = i * 0.5;
    y[i] = 1.5 - 0.3 * x[i] + noise[i];
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / 40;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / 40;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 40; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double b = sxy / sxx;
  const double a = my - b * mx;
  double sse = 0;
  for (int i = 0; i < 40; ++i) sse += std::pow(y[i] - a - b * x[i], 2);
  const double se = std::sqrt(sse / 38 / sxx);
  const auto fit = stats::simple_ols(x, y);
  CHECK(fit.slope == doctest::Approx(b).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(a).epsilon(1e-12));
  CHECK(fit.slope_se == doctest::Approx(se).epsilon(1e-10));
  CHECK(fit.t_stat == doctest::Approx(b / se).epsilon(1e-10));
}

TEST_CASE("distribution tails against tabulated values") {
  CHECK(stats::normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::student_t_sf(2.228138851986, 10) == doctest::Approx(0.025).epsilon(1e-8));
  CHECK(stats::chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(stats::normal_quantile(0.975) == doctest::Approx(1.959963984540054));
}

TEST_CASE("standardize uses the population sd") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto s = standardize(x);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(1.25)));
  CHECK(stats::population_sd(s.z) == doctest::Approx(1.0));
  const auto back = unstandardize(s);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]));
  const std::vector<double> flat{3, 3, 3};
  CHECK_THROWS_AS(standardize(flat), ZeroVariance);
}

TEST_CASE("rolling slope uses truncated head windows") {
  const std::vector<double> x{0, 1, 4, 9, 16};
  const auto s = rolling_slope(x, 3);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(1.0));
  CHECK(s[2] == doctest::Approx(2.0));
  CHECK(s[4] == doctest::Approx(6.0));
}

TEST_CASE("severity scale") {
  const SeverityScale s;
  CHECK(s.weight(SeverityLevel::Severe) == 50.0);
  CHECK(parse_severity("minor") == SeverityLevel::Minor);
  CHECK_THROWS_AS(parse_severity("catastrophic"), UnknownSeverityLevel);
  CHECK_THROWS_AS(SeverityScale({{SeverityLevel::Negligible, 5}, {SeverityLevel::Minor, 1}}), InvalidArgument);
  const std::vector<SeverityLevel> levels{SeverityLevel::Minor, SeverityLevel::Severe};
  CHECK(severity_sum(levels, s) == 53.0);
}

TEST_CASE("csv rows with quotes, commas and newlines") {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\n\"multi\nline\",x,\n");
  const auto r1 = csv::read_row(in);
  REQUIRE(r1);
  CHECK(*r1 == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  const auto r2 = csv::read_row(in);
  REQUIRE(r2);
  CHECK(*r2 == std::vector<std::string>{"multi\nline", "x", ""});
  CHECK_FALSE(csv::read_row(in));
  std::ostringstream out;
  csv::write_row(out, {"p,q", "plain", "\"x\""});
  CHECK(out.str() == "\"p,q\",plain,\"\"\"x\"\"\"\n");
}
