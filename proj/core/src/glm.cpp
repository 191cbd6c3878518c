#include "riskphase/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

double variance_of(CountFamily family, double alpha, double mu) {
  return family == CountFamily::Poisson ? mu : mu * (1.0 + alpha * mu);
}

std::vector<double> means_for(const Eigen::MatrixXd& x, std::span<const double> offset, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  std::vector<double> mu(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    mu[static_cast<std::size_t>(i)] = std::exp(std::clamp(eta(i) + offset[static_cast<std::size_t>(i)], -700.0, 700.0));
  }
  return mu;
}

double family_loglik(CountFamily family, double alpha, std::span<const double> y, std::span<const double> mu) {
  return family == CountFamily::Poisson ? poisson_loglik(y, mu) : negbin_loglik(y, mu, alpha);
}

}  // namespace

std::string_view to_string(CountFamily family) {
  return family == CountFamily::Poisson ? "poisson" : "negbin";
}

const CoefficientRow& CountModelFit::coefficient(std::string_view term) const {
  for (const auto& c : coefficients) {
    if (c.term == term) return c;
  }
  throw InvalidArgument("no coefficient named '" + std::string(term) + "'");
}

double poisson_loglik(std::span<const double> y, std::span<const double> mu) {
  double ll = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ll += (y[i] > 0.0 ? y[i] * std::log(mu[i]) : 0.0) - mu[i] - std::lgamma(y[i] + 1.0);
  }
  return ll;
}

double negbin_loglik(std::span<const double> y, std::span<const double> mu, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("negbin alpha must be positive");
  const double r = 1.0 / alpha;
  double ll = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double am = alpha * mu[i];
    ll += std::lgamma(y[i] + r) - std::lgamma(r) - std::lgamma(y[i] + 1.0) +
          (y[i] > 0.0 ? y[i] * std::log(am) : 0.0) - (y[i] + r) * std::log1p(am);
  }
  return ll;
}

double count_loglik(const Eigen::MatrixXd& design, std::span<const double> response, std::span<const double> offset,
                    CountFamily family, double alpha, const Eigen::VectorXd& beta) {
  const auto mu = means_for(design, offset, beta);
  return family_loglik(family, alpha, response, mu);
}

CountModelFit fit_glm(const Eigen::MatrixXd& x, std::span<const double> y, std::span<const double> offset,
                      CountFamily family, double alpha, std::vector<std::string> names, const IrlsOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (y.size() != n || offset.size() != n) throw InvalidArgument("fit_glm: row count mismatch");
  if (family == CountFamily::NegBin && !(alpha > 0.0)) throw InvalidArgument("negbin alpha must be positive");
  if (n <= p) throw SingularDesign("fit_glm: not more rows than coefficients");
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    throw AllZeroResponse("every response value is zero");
  }
  for (double v : y) {
    if (v < 0.0 || std::floor(v) != v) throw InvalidArgument("count response must be non-negative integers");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < p) throw SingularDesign("design matrix is rank deficient");
  if (names.empty()) {
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  }
  if (names.size() != p) throw InvalidArgument("fit_glm: name count mismatch");

  // Start: intercept-like column at log(mean(y)/mean(exp(offset))), others 0.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  {
    double sy = 0.0, se = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sy += y[i];
      se += std::exp(offset[i]);
    }
    const double start = std::log(sy / se);
    // Least squares for a constant predictor equal to `start`.
    beta = qr.solve(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), start));
  }

  auto mu = means_for(x, offset, beta);
  double ll = family_loglik(family, alpha, y, mu);
  CountModelFit fit;
  fit.family = family;
  fit.alpha = family == CountFamily::NegBin ? alpha : 0.0;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double var = variance_of(family, alpha, mu[i]);
      const auto ii = static_cast<Eigen::Index>(i);
      w(ii) = mu[i] * mu[i] / var;
      z(ii) = std::log(mu[i]) - offset[i] + (y[i] - mu[i]) / mu[i];
    }
    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtw * x);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw SingularDesign("IRLS weighted normal equations are singular");
    Eigen::VectorXd proposal = ldlt.solve(xtw * z);

    // Step halving keeps the loglik non-decreasing.
    double new_ll = -std::numeric_limits<double>::infinity();
    std::vector<double> new_mu;
    Eigen::VectorXd step = proposal - beta;
    for (int half = 0; half < 30; ++half) {
      const Eigen::VectorXd candidate = beta + step;
      new_mu = means_for(x, offset, candidate);
      new_ll = family_loglik(family, alpha, y, new_mu);
      if (std::isfinite(new_ll) && new_ll >= ll - 1e-12 * std::fabs(ll)) {
        proposal = candidate;
        break;
      }
      step *= 0.5;
    }
    if (!std::isfinite(new_ll)) break;
    const double change = std::fabs(new_ll - ll) / (std::fabs(new_ll) + 0.1);
    beta = proposal;
    mu = std::move(new_mu);
    ll = new_ll;
    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      u(static_cast<Eigen::Index>(i)) = (y[i] - mu[i]) * mu[i] / variance_of(family, alpha, mu[i]);
    }
    const double score = (x.transpose() * u).cwiseAbs().maxCoeff();
    if (change < options.rel_tol && score < options.score_tol) {
      fit.converged = true;
      ++iter;
      break;
    }
  }
  fit.iterations = iter;
  fit.loglik = ll;

  // Observed information for the log link: X' diag(mu (1 + alpha y) / (1 + alpha mu)^2) X.
  Eigen::VectorXd info_w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = fit.alpha;
    info_w(static_cast<Eigen::Index>(i)) = mu[i] * (1.0 + a * y[i]) / ((1.0 + a * mu[i]) * (1.0 + a * mu[i]));
  }
  const Eigen::MatrixXd info = x.transpose() * info_w.asDiagonal() * x;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    CoefficientRow row;
    row.term = names[j];
    row.estimate = beta(jj);
    row.se = std::sqrt(std::max(0.0, cov(jj, jj)));
    row.z = row.se > 0.0 ? row.estimate / row.se : 0.0;
    row.p_value = stats::normal_two_sided_p(row.z);
    row.rate_ratio = std::exp(row.estimate);
    fit.coefficients.push_back(row);
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - mu[i];
    chi2 += r * r / variance_of(family, fit.alpha, mu[i]);
  }
  fit.pearson_chi2 = chi2;
  fit.df_resid = static_cast<double>(n - p);
  fit.pearson_dispersion = chi2 / fit.df_resid;
  fit.response.assign(y.begin(), y.end());
  fit.offset.assign(offset.begin(), offset.end());
  fit.fitted = std::move(mu);
  fit.design.variance_function = family == CountFamily::Poisson ? "mu" : "mu + alpha*mu^2";
  return fit;
}

CountModelFit fit_count_model(const MonthlyPanel& panel, const CountFormula& formula, CountFamily family, double alpha,
                              const IrlsOptions& options) {
  panel.validate();
  if (formula.offset && !panel.has_exposure()) throw MissingExposure("offset requested but panel has no exposure");
  if (formula.media && !panel.has_media()) throw InvalidArgument("media covariate requested but panel has no media column");

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (formula.offset && !(panel.exposure[i] && *panel.exposure[i] > 0.0)) continue;
    rows.push_back(i);
  }
  if (rows.size() < 10) throw InsufficientData("count model needs at least 10 months, have " + std::to_string(rows.size()));

  std::vector<double> t, media;
  for (auto i : rows) {
    t.push_back(static_cast<double>(i));
    if (formula.media) media.push_back(panel.media_index[i]);
  }
  DesignMeta meta;
  meta.offset = formula.offset;
  meta.time_center = stats::mean(t);
  meta.time_scale = std::sqrt(stats::population_variance(t));
  if (formula.media) {
    meta.media_mean = stats::mean(media);
    meta.media_sd = std::sqrt(stats::population_variance(media));
    if (!(meta.media_sd > 0.0)) throw SingularDesign("media covariate is constant");
  }

  std::vector<std::string> names{"intercept"};
  if (formula.time_linear) names.push_back("time_linear");
  if (formula.time_quadratic) names.push_back("time_quadratic");
  if (formula.media) names.push_back("media_std");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(names.size()));
  std::vector<double> y(rows.size()), offset(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = rows[r];
    const auto rr = static_cast<Eigen::Index>(r);
    const double ts = (t[r] - meta.time_center) / meta.time_scale;
    Eigen::Index c = 0;
    x(rr, c++) = 1.0;
    if (formula.time_linear) x(rr, c++) = ts;
    if (formula.time_quadratic) x(rr, c++) = ts * ts;
    if (formula.media) x(rr, c++) = (media[r] - meta.media_mean) / meta.media_sd;
    y[r] = std::max(0.0, std::round(panel.nowcast_count[i]));
    if (formula.offset) offset[r] = std::log(*panel.exposure[i]);
  }

  CountModelFit fit = fit_glm(x, y, offset, family, alpha, names, options);
  fit.design.time_center = meta.time_center;
  fit.design.time_scale = meta.time_scale;
  fit.design.media_mean = meta.media_mean;
  fit.design.media_sd = meta.media_sd;
  fit.design.offset = meta.offset;
  for (auto i : rows) fit.months.push_back(panel.months[i]);
  return fit;
}

DispersionDiagnostics dispersion_diagnostics(const CountModelFit& fit) {
  DispersionDiagnostics d;
  d.pearson_ratio = fit.pearson_dispersion;
  d.overdispersed = d.pearson_ratio > 1.5;
  return d;
}

AlphaSearch alpha_grid_search(const MonthlyPanel& panel, const CountFormula& formula, std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("alpha grid is empty");
  AlphaSearch out;
  double best = -std::numeric_limits<double>::infinity();
  for (double a : grid) {
    if (!(a > 0.0)) throw InvalidArgument("alpha grid values must be positive");
    AlphaPoint pt;
    pt.alpha = a;
    try {
      pt.loglik = fit_count_model(panel, formula, CountFamily::NegBin, a).loglik;
    } catch (const Error& e) {
      pt.error = e.what();
    }
    if (pt.loglik && *pt.loglik > best) {
      best = *pt.loglik;
      out.best_alpha = a;
    }
    out.curve.push_back(pt);
  }
  if (!std::isfinite(best)) throw InsufficientData("no alpha in the grid produced a fit");
  return out;
}

LikelihoodRatio likelihood_ratio_poisson_vs_nb(double poisson_ll, double negbin_ll) {
  LikelihoodRatio lr;
  lr.statistic = 2.0 * (negbin_ll - poisson_ll);
  if (lr.statistic < 0.0) {
    lr.clamped = true;
    lr.statistic = 0.0;
  }
  // Under H0 alpha sits on the boundary: half the mass is a point at 0.
  lr.p_value = lr.statistic > 0.0 ? 0.5 * stats::chi2_sf(lr.statistic, 1.0) : 1.0;
  return lr;
}

LikelihoodRatio likelihood_ratio_poisson_vs_nb(const CountModelFit& poisson, const CountModelFit& negbin) {
  if (poisson.family != CountFamily::Poisson || negbin.family != CountFamily::NegBin) {
    throw InvalidArgument("likelihood ratio expects a Poisson fit and a negbin fit");
  }
  if (poisson.response != negbin.response || poisson.coefficients.size() != negbin.coefficients.size()) {
    throw InvalidArgument("likelihood ratio fits must share data and design");
  }
  return likelihood_ratio_poisson_vs_nb(poisson.loglik, negbin.loglik);
}

ExcessRiskSignal excess_risk(const MonthlyPanel& panel, const CountModelFit& fit, double epsilon, int slope_window) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("continuity constant must be non-negative");
  ExcessRiskSignal s;
  s.epsilon = epsilon;
  s.months = fit.months;
  s.excess.reserve(fit.months.size());
  for (std::size_t r = 0; r < fit.months.size(); ++r) {
    const auto pos = panel.position(fit.months[r]);
    if (!pos) throw InvalidArgument("fit month " + fit.months[r].str() + " not in panel");
    const double y = panel.nowcast_count[*pos];
    const double mu = fit.fitted[r];
    if (!(mu > 0.0)) throw InvalidArgument("fitted mean must be positive");
    s.excess.push_back(std::log((y + epsilon) / (mu + epsilon)));
  }
  try {
    s.standardized = make_risk_series(s.months, s.excess, slope_window);
  } catch (const ZeroVariance&) {
    s.degenerate = true;
  }
  return s;
}

}  // namespace riskphase
