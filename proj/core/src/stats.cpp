#include "riskphase/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <limits>
#include <numeric>

#include "riskphase/errors.hpp"

namespace riskphase::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_variance(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw InvalidArgument("sample variance needs two points");
  return population_variance(x) * static_cast<double>(x.size()) / static_cast<double>(x.size() - 1);
}

double quantile_type7(std::span<const double> x, double p) {
  if (x.empty()) throw InvalidArgument("quantile of empty series");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability outside [0,1]");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

OlsFit simple_ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("ols: length mismatch");
  if (x.size() < 3) throw InsufficientData("ols needs at least three points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ZeroVariance("ols: constant regressor");
  OlsFit fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double df = static_cast<double>(x.size()) - 2.0;
  const double sigma2 = rss / df;
  fit.slope_se = std::sqrt(sigma2 / sxx);
  if (fit.slope_se > 0.0) {
    fit.t_stat = fit.slope / fit.slope_se;
    fit.p_value = 2.0 * student_t_sf(std::fabs(fit.t_stat), df);
  } else {
    fit.t_stat = fit.slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
    fit.p_value = fit.slope == 0.0 ? 1.0 : 0.0;
  }
  return fit;
}

double slope_against_index(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  const double mx = (static_cast<double>(n) - 1.0) / 2.0;
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  return sxy / sxx;
}

double normal_cdf(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::normal_distribution<>{}, z);
}

double normal_two_sided_p(double z) {
  if (std::isinf(z)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>{}, std::fabs(z)));
}

double student_t_sf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  if (!(df > 0.0)) throw InvalidArgument("student_t_sf: df must be positive");
  return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<>{df}, t));
}

double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>{df}, x));
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<>{}, p);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace riskphase::stats
