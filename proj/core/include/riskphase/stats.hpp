#pragma once

#include <cmath>
#include <span>
#include <vector>

// Small numeric helpers shared by the modules. Variances are population
// (divide by n) unless the name says otherwise.
namespace riskphase::stats {

double mean(std::span<const double> x);
double population_variance(std::span<const double> x);
double sample_variance(std::span<const double> x);
inline double population_sd(std::span<const double> x);

/// Linear-interpolation quantile (Hyndman-Fan type 7). p in [0, 1].
double quantile_type7(std::span<const double> x, double p);

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;  // two-sided, Student-t with n-2 df
  std::size_t n = 0;
};

/// Classical (homoskedastic) simple regression of y on x.
OlsFit simple_ols(std::span<const double> x, std::span<const double> y);

/// OLS slope only; x = 0..n-1. Returns 0 for fewer than two points.
double slope_against_index(std::span<const double> y);

double normal_cdf(double z);
/// Two-sided p-value for a standard-normal statistic.
double normal_two_sided_p(double z);
/// Upper tail P(T > t) of Student-t with df degrees of freedom (df may be fractional).
double student_t_sf(double t, double df);
/// Upper tail P(X > x) for chi-square with df degrees of freedom.
double chi2_sf(double x, double df);
double normal_quantile(double p);

std::vector<double> linspace(double lo, double hi, std::size_t n);

inline double population_sd(std::span<const double> x) {
  return std::sqrt(population_variance(x));
}

}  // namespace riskphase::stats
