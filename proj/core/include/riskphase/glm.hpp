#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskphase/series.hpp"

namespace riskphase {

enum class CountFamily { Poisson, NegBin };

std::string_view to_string(CountFamily family);

/// Which covariates enter the log-linear predictor. Time is the panel
/// position, centered at its mean and scaled to unit sd; the quadratic term
/// is the square of that scaled time. Media is standardized to mean 0, sd 1.
struct CountFormula {
  bool time_linear = true;
  bool time_quadratic = false;
  bool media = false;
  bool offset = true;  // log(exposure)
};

struct IrlsOptions {
  double rel_tol = 1e-10;  // relative loglik change
  double score_tol = 1e-7;
  int max_iter = 100;
};

struct CoefficientRow {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // Wald, two-sided
  double rate_ratio = 1.0;
};

struct DesignMeta {
  double time_center = 0.0;
  double time_scale = 1.0;
  double media_mean = 0.0;
  double media_sd = 1.0;
  bool offset = false;
  std::string variance_function;  // "mu" or "mu + alpha*mu^2"
};

/// Fitted Poisson or NB2 (Var = mu + alpha * mu^2) log-link model.
struct CountModelFit {
  CountFamily family = CountFamily::Poisson;
  double alpha = 0.0;  // NB2 dispersion, fixed by the caller
  std::vector<CoefficientRow> coefficients;
  double loglik = 0.0;
  double pearson_chi2 = 0.0;
  double df_resid = 0.0;
  double pearson_dispersion = 0.0;
  bool converged = false;
  int iterations = 0;
  DesignMeta design;

  std::vector<MonthIndex> months;  // rows used by the fit
  std::vector<double> response;    // rounded counts
  std::vector<double> fitted;      // mu-hat
  std::vector<double> offset;      // log exposure (0 without offset)

  const CoefficientRow& coefficient(std::string_view term) const;
};

/// Low-level IRLS on an explicit design. Throws SingularDesign,
/// AllZeroResponse. Coefficient names default to x0, x1, ...
CountModelFit fit_glm(const Eigen::MatrixXd& design, std::span<const double> response, std::span<const double> offset,
                      CountFamily family, double alpha = 0.0, std::vector<std::string> names = {},
                      const IrlsOptions& options = {});

/// Panel front-end: response is the rounded nowcast count. Months without
/// positive exposure are dropped when the offset is used. Needs >= 10 rows.
CountModelFit fit_count_model(const MonthlyPanel& panel, const CountFormula& formula, CountFamily family,
                              double alpha = 0.0, const IrlsOptions& options = {});

/// Loglik of a count model at arbitrary coefficients (used for score checks).
double count_loglik(const Eigen::MatrixXd& design, std::span<const double> response, std::span<const double> offset,
                    CountFamily family, double alpha, const Eigen::VectorXd& beta);

double poisson_loglik(std::span<const double> y, std::span<const double> mu);
double negbin_loglik(std::span<const double> y, std::span<const double> mu, double alpha);

struct DispersionDiagnostics {
  double pearson_ratio = 0.0;
  bool overdispersed = false;  // ratio > 1.5
};

DispersionDiagnostics dispersion_diagnostics(const CountModelFit& fit);

struct AlphaPoint {
  double alpha = 0.0;
  std::optional<double> loglik;  // nullopt when the fit failed
  std::string error;
};

struct AlphaSearch {
  double best_alpha = 0.0;
  std::vector<AlphaPoint> curve;
};

/// Refits the NB2 model at each alpha and keeps the loglik maximizer.
AlphaSearch alpha_grid_search(const MonthlyPanel& panel, const CountFormula& formula, std::span<const double> grid);

struct LikelihoodRatio {
  double statistic = 0.0;
  double p_value = 1.0;  // 0.5*chi2_0 + 0.5*chi2_1 boundary mixture
  bool clamped = false;  // NB loglik fell below Poisson numerically
};

LikelihoodRatio likelihood_ratio_poisson_vs_nb(double poisson_loglik, double negbin_loglik);
LikelihoodRatio likelihood_ratio_poisson_vs_nb(const CountModelFit& poisson, const CountModelFit& negbin);

struct ExcessRiskSignal {
  std::vector<MonthIndex> months;
  std::vector<double> excess;  // log((y + eps) / (mu + eps))
  std::optional<RiskSeries> standardized;
  bool degenerate = false;  // excess was constant, so no standardized series
  double epsilon = 0.5;
};

/// y is the unrounded nowcast count of the panel at each fitted month.
ExcessRiskSignal excess_risk(const MonthlyPanel& panel, const CountModelFit& fit, double epsilon = 0.5,
                             int slope_window = 3);

}  // namespace riskphase
