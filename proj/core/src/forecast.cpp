#include "riskphase/forecast.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

std::vector<double> difference(std::span<const double> x) {
  std::vector<double> out;
  for (std::size_t i = 1; i < x.size(); ++i) out.push_back(x[i] - x[i - 1]);
  return out;
}

using Residuals = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct LmResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt on a residual function; a nullopt residual rejects the step.
LmResult levenberg_marquardt(Eigen::VectorXd x, const Residuals& f, int max_iter = 200) {
  auto r = f(x);
  if (!r) throw InvalidArgument("LM start point is infeasible");
  LmResult out;
  double cost = r->squaredNorm();
  double lambda = 1e-3;
  const auto k = x.size();
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    Eigen::MatrixXd J(r->size(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      Eigen::VectorXd xp = x;
      xp[j] += h;
      auto rp = f(xp);
      if (rp) {
        J.col(j) = (*rp - *r) / h;
        continue;
      }
      xp[j] = x[j] - h;
      auto rm = f(xp);
      if (!rm) throw InvalidArgument("LM Jacobian is infeasible");
      J.col(j) = (*r - *rm) / h;
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * *r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + cost)) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd M = A;
      for (Eigen::Index j = 0; j < k; ++j) M(j, j) += lambda * (A(j, j) + 1e-9);
      const Eigen::VectorXd step = M.ldlt().solve(-g);
      const Eigen::VectorXd xn = x + step;
      auto rn = f(xn);
      if (rn && rn->squaredNorm() < cost) {
        const double new_cost = rn->squaredNorm();
        const double rel = (cost - new_cost) / std::max(cost, 1e-300);
        x = xn;
        r = rn;
        cost = new_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (rel < 1e-12 || step.norm() < 1e-10 * (1.0 + x.norm())) out.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      // No descent direction left at this precision.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.x = x;
  out.cost = cost;
  return out;
}

bool roots_outside_unit_circle(std::span<const double> coef, double sign) {
  // Polynomial 1 + sign*sum c_i z^i; check companion eigenvalues inside unit circle.
  std::size_t m = coef.size();
  while (m > 0 && coef[m - 1] == 0.0) --m;
  if (m == 0) return true;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) C(static_cast<Eigen::Index>(i), 0) = -sign * coef[i];
  for (std::size_t i = 0; i + 1 < m; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()[i]) >= 1.0 - 1e-10) return false;
  }
  return true;
}

bool ar_stationary(std::span<const double> ar) { return roots_outside_unit_circle(ar, -1.0); }
bool ma_invertible(std::span<const double> ma) { return roots_outside_unit_circle(ma, 1.0); }

struct Params {
  std::vector<double> ar, ma;
  double mean = 0.0;
};

Params unpack(const Eigen::VectorXd& x, int p, int q, bool constant) {
  Params out;
  for (int i = 0; i < p; ++i) out.ar.push_back(x[i]);
  for (int j = 0; j < q; ++j) out.ma.push_back(x[p + j]);
  if (constant) out.mean = x[p + q];
  return out;
}

std::vector<double> css_residuals(std::span<const double> w, const Params& pr) {
  const std::size_t p = pr.ar.size(), q = pr.ma.size();
  std::vector<double> e(w.size(), 0.0);
  std::vector<double> out;
  for (std::size_t t = p; t < w.size(); ++t) {
    double v = w[t] - pr.mean;
    for (std::size_t i = 0; i < p; ++i) v -= pr.ar[i] * (w[t - i - 1] - pr.mean);
    for (std::size_t j = 0; j < q && j < t; ++j) v -= pr.ma[j] * e[t - j - 1];
    e[t] = v;
    out.push_back(v);
  }
  return out;
}

struct KalmanOut {
  std::vector<double> v;
  std::vector<double> F;
  double ssq = 0.0;    // sum v^2 / F
  double sumlog = 0.0; // sum log F
  Eigen::VectorXd state;
};

std::optional<KalmanOut> kalman(std::span<const double> w, const Params& pr) {
  if (!ar_stationary(pr.ar)) return std::nullopt;
  const int p = static_cast<int>(pr.ar.size()), q = static_cast<int>(pr.ma.size());
  const int r = std::max(p, q + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < p; ++i) T(i, 0) = pr.ar[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < r; ++i) T(i, i + 1) = 1.0;
  Eigen::VectorXd R = Eigen::VectorXd::Zero(r);
  R[0] = 1.0;
  for (int j = 0; j < q; ++j) R[j + 1] = pr.ma[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd Q = R * R.transpose();
  // P = T P T' + Q via vec(P) = (I - T kron T)^-1 vec(Q).
  const int r2 = r * r;
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(r2, r2);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d) K(a * r + c, b * r + d) -= T(a, b) * T(c, d);
  Eigen::VectorXd vecQ(r2);
  for (int a = 0; a < r; ++a)
    for (int c = 0; c < r; ++c) vecQ[a * r + c] = Q(a, c);
  const Eigen::VectorXd vecP = K.fullPivLu().solve(vecQ);
  Eigen::MatrixXd P(r, r);
  for (int a = 0; a < r; ++a)
    for (int c = 0; c < r; ++c) P(a, c) = vecP[a * r + c];
  P = 0.5 * (P + P.transpose());

  KalmanOut out;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
  for (double obs : w) {
    const double F = P(0, 0);
    if (!(F > 0.0) || !std::isfinite(F)) return std::nullopt;
    const double v = (obs - pr.mean) - a[0];
    const Eigen::VectorXd gain = T * P.col(0) / F;
    a = T * a + gain * v;
    P = T * P * T.transpose() + Q - gain * gain.transpose() * F;
    P = 0.5 * (P + P.transpose());
    out.v.push_back(v);
    out.F.push_back(F);
    out.ssq += v * v / F;
    out.sumlog += std::log(F);
  }
  out.state = a;
  return out;
}

double exact_loglik(const KalmanOut& k, double& sigma2) {
  const double n = static_cast<double>(k.v.size());
  sigma2 = k.ssq / n;
  return -0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0) - 0.5 * k.sumlog;
}

void shrink_to_stationary(std::vector<double>& ar) {
  for (int guard = 0; guard < 200 && !ar_stationary(ar); ++guard) {
    double f = 0.9;
    for (double& c : ar) {
      c *= f;
      f *= 0.9;
    }
  }
}

}  // namespace

std::string_view to_string(AdfBand b) {
  switch (b) {
    case AdfBand::Below1: return "<0.01";
    case AdfBand::Below5: return "<0.05";
    case AdfBand::Below10: return "<0.10";
    case AdfBand::Above10: return ">=0.10";
  }
  return "?";
}

std::array<double, 3> adf_critical_values(std::size_t n) {
  struct Row {
    double n;
    std::array<double, 3> cv;
  };
  static constexpr Row table[] = {
      {25, {-3.75, -3.00, -2.63}},  {50, {-3.58, -2.93, -2.60}},  {100, {-3.51, -2.89, -2.58}},
      {250, {-3.46, -2.88, -2.57}}, {500, {-3.44, -2.87, -2.57}},
  };
  static constexpr std::array<double, 3> asymptotic{-3.43, -2.86, -2.57};
  const double x = static_cast<double>(n);
  if (x <= table[0].n) return table[0].cv;
  for (std::size_t i = 0; i + 1 < std::size(table); ++i) {
    if (x <= table[i + 1].n) {
      const double w = (x - table[i].n) / (table[i + 1].n - table[i].n);
      std::array<double, 3> out{};
      for (int j = 0; j < 3; ++j) out[j] = table[i].cv[j] + w * (table[i + 1].cv[j] - table[i].cv[j]);
      return out;
    }
  }
  const double w = 500.0 / x;  // 1 at n=500, 0 as n grows
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j) out[j] = asymptotic[j] + w * (table[4].cv[j] - asymptotic[j]);
  return out;
}

AdfResult adf_test(std::span<const double> series, int max_lag) {
  const std::size_t n = series.size();
  if (n < 10) throw SeriesTooShort("ADF needs at least 10 observations");
  const int L = max_lag >= 0 ? max_lag : static_cast<int>(std::floor(std::cbrt(static_cast<double>(n - 1))));
  const auto dy = difference(series);
  // Rows t = L .. n-2 of dy; regressors: 1, y_{t}, dy_{t-1..t-L}.
  if (dy.size() < static_cast<std::size_t>(L) + 8 + static_cast<std::size_t>(L)) {
    throw SeriesTooShort("ADF regression has too few observations for the lag order");
  }
  const auto m = static_cast<Eigen::Index>(dy.size() - static_cast<std::size_t>(L));
  const Eigen::Index k = 2 + L;
  Eigen::MatrixXd X(m, k);
  Eigen::VectorXd Y(m);
  for (Eigen::Index row = 0; row < m; ++row) {
    const std::size_t t = static_cast<std::size_t>(row) + static_cast<std::size_t>(L);
    Y[row] = dy[t];
    X(row, 0) = 1.0;
    X(row, 1) = series[t];
    for (int i = 1; i <= L; ++i) X(row, 1 + i) = dy[t - static_cast<std::size_t>(i)];
  }
  const Eigen::MatrixXd XtX = X.transpose() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(XtX);
  const Eigen::VectorXd beta = ldlt.solve(X.transpose() * Y);
  const Eigen::VectorXd resid = Y - X * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(m - k);
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  const double se = std::sqrt(s2 * inv(1, 1));
  if (!(se > 0.0)) throw ConstantInput("ADF regression is degenerate");

  AdfResult out;
  out.tau = beta[1] / se;
  out.lags = L;
  out.n_obs = static_cast<std::size_t>(m);
  const auto cv = adf_critical_values(n);
  out.crit1 = cv[0];
  out.crit5 = cv[1];
  out.crit10 = cv[2];
  if (out.tau < cv[0]) out.p_band = AdfBand::Below1;
  else if (out.tau < cv[1]) out.p_band = AdfBand::Below5;
  else if (out.tau < cv[2]) out.p_band = AdfBand::Below10;
  else out.p_band = AdfBand::Above10;
  return out;
}

std::string ArimaOrder::str() const {
  return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
}

ArimaFit arima_fit(std::span<const double> series, ArimaOrder order) {
  if (order.p < 0 || order.d < 0 || order.q < 0) throw InvalidArgument("negative ARIMA order");
  const int n = static_cast<int>(series.size());
  if (n - order.d <= order.p + order.q + 5) throw SeriesTooShort("series too short for ARIMA" + order.str());
  std::vector<double> w(series.begin(), series.end());
  for (int i = 0; i < order.d; ++i) w = difference(w);

  const int p = order.p, q = order.q;
  const bool constant = order.d == 0;
  const int k = p + q + (constant ? 1 : 0);

  ArimaFit fit;
  fit.order = order;
  fit.has_constant = constant;
  fit.series.assign(series.begin(), series.end());
  fit.n_used = w.size();
  fit.n_params = p + q + 1 + (constant ? 1 : 0);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
  if (constant) x[p + q] = stats::mean(w);

  if (k > 0) {
    const Residuals css = [&](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
      const auto e = css_residuals(w, unpack(v, p, q, constant));
      Eigen::VectorXd r(static_cast<Eigen::Index>(e.size()));
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!std::isfinite(e[i]) || std::abs(e[i]) > 1e150) return std::nullopt;
        r[static_cast<Eigen::Index>(i)] = e[i];
      }
      return r;
    };
    x = levenberg_marquardt(x, css).x;

    auto start = unpack(x, p, q, constant);
    shrink_to_stationary(start.ar);
    for (int i = 0; i < p; ++i) x[i] = start.ar[static_cast<std::size_t>(i)];

    const double nn = static_cast<double>(w.size());
    const Residuals exact = [&](const Eigen::VectorXd& v) -> std::optional<Eigen::VectorXd> {
      auto kf = kalman(w, unpack(v, p, q, constant));
      if (!kf) return std::nullopt;
      const double scale = std::exp(kf->sumlog / (2.0 * nn));
      Eigen::VectorXd r(static_cast<Eigen::Index>(kf->v.size()));
      for (std::size_t i = 0; i < kf->v.size(); ++i) {
        r[static_cast<Eigen::Index>(i)] = kf->v[i] / std::sqrt(kf->F[i]) * scale;
      }
      if (!r.allFinite()) return std::nullopt;
      return r;
    };
    const auto lm = levenberg_marquardt(x, exact);
    x = lm.x;
    fit.iterations = lm.iterations;
    fit.converged = lm.converged;
  } else {
    fit.converged = true;
  }

  const auto pr = unpack(x, p, q, constant);
  fit.ar = pr.ar;
  fit.ma = pr.ma;
  fit.mean = pr.mean;
  const auto kf = kalman(w, pr);
  if (!kf) throw InvalidArgument("ARIMA" + order.str() + ": non-stationary fit");
  fit.loglik = exact_loglik(*kf, fit.sigma2);
  fit.aic = 2.0 * fit.n_params - 2.0 * fit.loglik;
  fit.residuals = kf->v;
  fit.state.assign(kf->state.data(), kf->state.data() + kf->state.size());
  fit.non_stationary = !ar_stationary(fit.ar);
  fit.non_invertible = !ma_invertible(fit.ma);
  return fit;
}

std::vector<ArimaOrder> default_arima_grid() {
  return {{1, 0, 0}, {0, 1, 1}, {1, 1, 1}, {2, 1, 2}, {1, 1, 0}, {2, 1, 0}, {0, 1, 2}, {2, 1, 1}, {1, 1, 2}};
}

ArimaSelection arima_select(std::span<const double> series, std::span<const ArimaOrder> grid) {
  if (grid.empty()) throw InvalidArgument("empty ARIMA grid");
  const std::vector<double> data(series.begin(), series.end());
  std::vector<std::future<ArimaFit>> jobs;
  for (const auto& o : grid) {
    jobs.push_back(std::async(std::launch::async, [&data, o] { return arima_fit(data, o); }));
  }
  ArimaSelection out;
  std::optional<std::size_t> best;
  std::vector<ArimaFit> fits;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ArimaTableRow row;
    row.order = grid[i];
    try {
      auto f = jobs[i].get();
      row.aic = f.aic;
      row.loglik = f.loglik;
      row.n_params = f.n_params;
      row.converged = f.converged;
      row.non_invertible = f.non_invertible;
      row.non_stationary = f.non_stationary;
      if (!best || f.aic < fits[*best].aic) best = fits.size();
      fits.push_back(std::move(f));
    } catch (const Error& e) {
      row.error = e.what();
    }
    out.table.push_back(std::move(row));
  }
  if (!best) throw InvalidArgument("no ARIMA order could be fitted");
  out.best = std::move(fits[*best]);
  return out;
}

std::vector<double> psi_weights(const ArimaFit& fit, std::size_t count) {
  // phi*(B) = phi(B) (1 - B)^d, written as 1 - sum a_i B^i.
  std::vector<double> poly{1.0};
  for (double c : fit.ar) poly.push_back(-c);
  for (int i = 0; i < fit.order.d; ++i) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      next[j] += poly[j];
      next[j + 1] -= poly[j];
    }
    poly = std::move(next);
  }
  std::vector<double> a;
  for (std::size_t i = 1; i < poly.size(); ++i) a.push_back(-poly[i]);
  std::vector<double> psi(count, 0.0);
  if (count == 0) return psi;
  psi[0] = 1.0;
  for (std::size_t j = 1; j < count; ++j) {
    double v = j <= fit.ma.size() ? fit.ma[j - 1] : 0.0;
    for (std::size_t i = 1; i <= a.size() && i <= j; ++i) v += a[i - 1] * psi[j - i];
    psi[j] = v;
  }
  return psi;
}

ForecastBand forecast(const ArimaFit& fit, std::size_t horizon, const PhaseThresholds& th,
                      const RiskMapping& mapping, MonthIndex last_month) {
  if (!(mapping.sd > 0.0)) throw InvalidArgument("risk mapping sd must be positive");
  const int p = fit.order.p, q = fit.order.q;
  const int r = std::max(p, q + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < p; ++i) T(i, 0) = fit.ar[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < r; ++i) T(i, i + 1) = 1.0;
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(fit.state.data(), static_cast<Eigen::Index>(fit.state.size()));

  std::vector<double> wf;
  for (std::size_t h = 0; h < horizon; ++h) {
    wf.push_back(fit.mean + a[0]);
    a = T * a;
  }
  // Integrate back through each differencing level.
  std::vector<std::vector<double>> levels{fit.series};
  for (int i = 0; i < fit.order.d; ++i) levels.push_back(difference(levels.back()));
  std::vector<double> path = wf;
  for (int lvl = fit.order.d - 1; lvl >= 0; --lvl) {
    double last = levels[static_cast<std::size_t>(lvl)].back();
    for (double& v : path) {
      last += v;
      v = last;
    }
  }

  const auto psi = psi_weights(fit, horizon);
  ForecastBand out;
  double cum = 0.0;
  for (std::size_t h = 0; h < horizon; ++h) {
    cum += psi[h] * psi[h];
    const double half = 1.96 * std::sqrt(fit.sigma2 * cum);
    out.months.push_back(last_month.plus(static_cast<int>(h) + 1));
    out.point.push_back(path[h]);
    out.lower95.push_back(path[h] - half);
    out.upper95.push_back(path[h] + half);
    if (path[h] - half < 0.0) out.negative_lower = true;
    const double z = (path[h] - mapping.mean) / mapping.sd;
    out.projected_phase.push_back(classify_six({1.0, z, 0.0}, th));
  }
  return out;
}

}  // namespace riskphase
