#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskphase/month.hpp"
#include "riskphase/phases.hpp"

namespace riskphase {

enum class AdfBand { Below1, Below5, Below10, Above10 };
std::string_view to_string(AdfBand b);

struct AdfResult {
  double tau = 0.0;
  int lags = 0;
  std::size_t n_obs = 0;  // observations in the test regression
  double crit1 = 0.0, crit5 = 0.0, crit10 = 0.0;
  AdfBand p_band = AdfBand::Above10;
};

/// ADF regression with constant. max_lag < 0 selects floor((n-1)^(1/3)).
/// Throws SeriesTooShort when fewer than lags + 8 usable observations remain.
AdfResult adf_test(std::span<const double> series, int max_lag = -1);

/// Interpolated critical values (1%, 5%, 10%) for the constant-only case.
std::array<double, 3> adf_critical_values(std::size_t n);

struct ArimaOrder {
  int p = 0, d = 0, q = 0;
  std::string str() const;
  auto operator<=>(const ArimaOrder&) const = default;
};

struct ArimaFit {
  ArimaOrder order;
  std::vector<double> ar;  // x_t = c + sum ar_i x_{t-i} + e_t + sum ma_j e_{t-j}
  std::vector<double> ma;
  bool has_constant = false;
  double mean = 0.0;  // process mean of the differenced series (d = 0 only)
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  std::size_t n_used = 0;  // observations after differencing
  std::vector<double> residuals;  // one-step prediction errors
  bool converged = false;
  bool non_invertible = false;
  bool non_stationary = false;
  int iterations = 0;
  std::vector<double> series;  // original level series
  // Kalman state after the last observation, for forecasting.
  std::vector<double> state;
};

/// CSS start followed by exact Gaussian likelihood refinement.
/// Throws SeriesTooShort unless n - d > p + q + 5.
ArimaFit arima_fit(std::span<const double> series, ArimaOrder order);

struct ArimaTableRow {
  ArimaOrder order;
  std::optional<double> aic;
  std::optional<double> loglik;
  int n_params = 0;
  bool converged = false;
  bool non_invertible = false;
  bool non_stationary = false;
  std::string error;
};

struct ArimaSelection {
  ArimaFit best;
  std::vector<ArimaTableRow> table;
};

std::vector<ArimaOrder> default_arima_grid();

/// Fits every order, picks minimum AIC among successful fits.
ArimaSelection arima_select(std::span<const double> series, std::span<const ArimaOrder> grid);

/// psi-weights of the integrated model, psi_0 = 1.
std::vector<double> psi_weights(const ArimaFit& fit, std::size_t count);

struct RiskMapping {
  double mean = 0.0;
  double sd = 1.0;
};

struct ForecastBand {
  std::vector<MonthIndex> months;
  std::vector<double> point;
  std::vector<double> lower95;
  std::vector<double> upper95;
  std::vector<SixPhase> projected_phase;
  bool negative_lower = false;
};

/// Point path from the filtered state, integrated d times; band +-1.96 sd from
/// psi-weights. Projected phase uses z = (point - mean)/sd with zero trend.
ForecastBand forecast(const ArimaFit& fit, std::size_t horizon, const PhaseThresholds& th,
                      const RiskMapping& mapping, MonthIndex last_month);

}  // namespace riskphase
