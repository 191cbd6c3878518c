#pragma once

#include <span>
#include <string>
#include <vector>

#include "riskphase/ingest.hpp"
#include "riskphase/series.hpp"

namespace riskphase {

/// Report-minus-incident lags in days.
struct LagSample {
  std::vector<double> days;  // valid lags, 0..kMaxLagDays
  std::size_t excluded = 0;  // negative or longer than five years
  std::size_t total = 0;

  double excluded_fraction() const {
    return total ? static_cast<double>(excluded) / static_cast<double>(total) : 0.0;
  }
};

inline constexpr int kMaxLagDays = 1826;
inline constexpr double kDaysPerMonth = 30.44;

/// One lag per report date of every record.
LagSample compute_lags(const std::vector<IncidentRecord>& records);

enum class DelayFamily { Lognormal, Exponential, Weibull };

std::string_view to_string(DelayFamily family);

struct DelayModel {
  DelayFamily family = DelayFamily::Lognormal;
  // lognormal: (mu, sigma) on log-days; exponential: (rate, -); weibull: (shape, scale)
  double param1 = 0.0;
  double param2 = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  std::size_t n_valid = 0;
  double excluded_fraction = 0.0;
  double zero_shift = 0.5;  // replacement value for zero-day lags
  std::size_t n_shifted = 0;
  bool degenerate = false;
  std::vector<std::string> warnings;

  int n_params() const { return family == DelayFamily::Exponential ? 1 : 2; }
  /// Mean implied by the fitted distribution, in days.
  double model_mean() const;
};

struct DelayFitOptions {
  /// Zero-day lags are replaced by this value before fitting (0 disables).
  double zero_shift = 0.5;
  std::size_t min_n = 10;
  std::size_t small_sample_n = 20;
};

/// Maximum-likelihood fit. Throws InsufficientData below `min_n` lags and
/// NonPositiveLag when a non-positive lag reaches the fitter.
DelayModel fit_delay(std::span<const double> lag_days, DelayFamily family, const DelayFitOptions& options = {});

struct DelaySelection {
  DelayModel best;
  std::vector<DelayModel> candidates;  // lognormal, exponential, weibull
  double empirical_mean_days = 0.0;
};

/// Fits all families and keeps the minimum AIC; ties go to lognormal.
DelaySelection select_delay_model(std::span<const double> lag_days, const DelayFitOptions& options = {});

/// floor(days / 30.44) for each lag.
std::vector<int> lags_to_months(std::span<const double> lag_days);

struct NowcastAdjustment {
  int window_months = 0;   // h*
  std::vector<double> cdf;  // F(0..h*)
  double cap = 5.0;
  double percentile = 0.95;

  /// min(1 / F(h), cap) for h <= h*, 1 beyond the window.
  double inflation(int horizon) const;
};

/// h* = ceil(percentile of the month lags); F(h) = share of lags <= h.
NowcastAdjustment build_nowcast(std::span<const int> lag_months, double percentile = 0.95, double cap = 5.0);

/// Inflates raw counts inside the window ending at `as_of`; older months keep
/// nowcast == raw. Throws InvalidArgument when as_of precedes the last month.
MonthlyPanel apply_nowcast(const MonthlyPanel& panel, const NowcastAdjustment& adj, MonthIndex as_of);

}  // namespace riskphase
