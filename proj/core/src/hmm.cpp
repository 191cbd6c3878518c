#include "riskphase/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274;

double gaussian_density(double x, double mean, double var) {
  const double r = x - mean;
  return std::exp(-0.5 * r * r / var - 0.5 * std::log(var) - kLogSqrt2Pi);
}

struct Params {
  std::vector<double> means, vars, init;
  std::vector<std::vector<double>> trans;
};

Params initial_params(std::span<const double> x, int k, std::uint64_t seed, double var_floor) {
  std::mt19937_64 rng(seed);
  Params p;
  const double overall_var = std::max(stats::population_variance(x), var_floor);
  // Means at jittered quantiles so restarts explore different starts.
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  for (int j = 0; j < k; ++j) {
    const double q = std::clamp((j + 0.5 + (seed == 0 ? 0.0 : jitter(rng))) / k, 0.0, 1.0);
    p.means.push_back(stats::quantile_type7(x, q));
  }
  std::sort(p.means.begin(), p.means.end());
  p.vars.assign(static_cast<std::size_t>(k), std::max(overall_var / (k * k), var_floor));
  p.init.assign(static_cast<std::size_t>(k), 1.0 / k);
  const double stay = k == 1 ? 1.0 : 0.9;
  p.trans.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), k == 1 ? 1.0 : (1.0 - stay) / (k - 1)));
  for (int j = 0; j < k; ++j) p.trans[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = stay;
  return p;
}

HmmFit run_em(std::span<const double> x, int k, std::uint64_t seed, const HmmOptions& opt) {
  Params p = initial_params(x, k, seed, opt.variance_floor);
  const std::size_t n = x.size();
  const auto K = static_cast<std::size_t>(k);
  HmmFit fit;
  fit.n_states = k;
  fit.seed = seed;
  double prev = -std::numeric_limits<double>::infinity();
  ForwardBackward fb;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    fb = hmm_forward_backward(x, p.means, p.vars, p.trans, p.init);
    fit.loglik_trace.push_back(fb.loglik);
    if (fb.loglik < prev - 1e-9 * (1.0 + std::fabs(prev))) fit.monotone = false;
    fit.iterations = iter + 1;
    if (std::isfinite(prev) && fb.loglik - prev < opt.tol) {
      fit.converged = true;
      break;
    }
    prev = fb.loglik;

    // M-step.
    for (std::size_t j = 0; j < K; ++j) {
      double w = 0.0, wx = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        w += fb.gamma[t][j];
        wx += fb.gamma[t][j] * x[t];
      }
      p.init[j] = fb.gamma[0][j];
      if (w <= 1e-300) continue;  // empty state keeps its previous emission
      const double m = wx / w;
      double wv = 0.0;
      for (std::size_t t = 0; t < n; ++t) wv += fb.gamma[t][j] * (x[t] - m) * (x[t] - m);
      p.means[j] = m;
      p.vars[j] = std::max(wv / w, opt.variance_floor);
      double row = 0.0;
      for (std::size_t l = 0; l < K; ++l) row += fb.xi_sum[j][l];
      if (row > 1e-300) {
        for (std::size_t l = 0; l < K; ++l) p.trans[j][l] = fb.xi_sum[j][l] / row;
      }
    }
  }
  // Posterior at the final parameters.
  fb = hmm_forward_backward(x, p.means, p.vars, p.trans, p.init);
  fit.loglik = fb.loglik;
  fit.means = p.means;
  fit.variances = p.vars;
  fit.transition = p.trans;
  fit.initial = p.init;
  fit.posterior = fb.gamma;
  fit.decoded.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& g = fb.gamma[t];
    const auto j = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
    fit.decoded[t] = static_cast<int>(j);
    if (gaussian_density(x[t], p.means[j], p.vars[j]) > opt.degenerate_density) fit.degenerate = true;
  }
  return fit;
}

}  // namespace

ForwardBackward hmm_forward_backward(std::span<const double> x, const std::vector<double>& means,
                                     const std::vector<double>& variances,
                                     const std::vector<std::vector<double>>& transition,
                                     const std::vector<double>& initial) {
  const std::size_t n = x.size();
  const std::size_t K = means.size();
  std::vector<std::vector<double>> emit(n, std::vector<double>(K));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < K; ++j) emit[t][j] = std::max(gaussian_density(x[t], means[j], variances[j]), 1e-300);
  }
  std::vector<std::vector<double>> alpha(n, std::vector<double>(K)), beta(n, std::vector<double>(K, 1.0));
  std::vector<double> scale(n);
  for (std::size_t t = 0; t < n; ++t) {
    double c = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      double a = 0.0;
      if (t == 0) {
        a = initial[j];
      } else {
        for (std::size_t i = 0; i < K; ++i) a += alpha[t - 1][i] * transition[i][j];
      }
      alpha[t][j] = a * emit[t][j];
      c += alpha[t][j];
    }
    scale[t] = c;
    for (std::size_t j = 0; j < K; ++j) alpha[t][j] /= c;
  }
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < K; ++i) {
      double b = 0.0;
      for (std::size_t j = 0; j < K; ++j) b += transition[i][j] * emit[t + 1][j] * beta[t + 1][j];
      beta[t][i] = b / scale[t + 1];
    }
  }
  ForwardBackward out;
  out.loglik = 0.0;
  for (double c : scale) out.loglik += std::log(c);
  out.gamma.assign(n, std::vector<double>(K));
  out.xi_sum.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      out.gamma[t][j] = alpha[t][j] * beta[t][j];
      s += out.gamma[t][j];
    }
    for (std::size_t j = 0; j < K; ++j) out.gamma[t][j] /= s;
    if (t + 1 < n) {
      for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
          out.xi_sum[i][j] += alpha[t][i] * transition[i][j] * emit[t + 1][j] * beta[t + 1][j] / scale[t + 1];
        }
      }
    }
  }
  return out;
}

HmmFit hmm_fit(std::span<const double> signal, int n_states, std::uint64_t seed, const HmmOptions& options) {
  if (n_states < 1) throw InvalidArgument("HMM needs at least one state");
  if (signal.size() <= static_cast<std::size_t>(2 * n_states)) {
    throw TooManyStates(std::to_string(n_states) + " states need more than " + std::to_string(2 * n_states) +
                        " observations");
  }
  const int restarts = std::max(1, options.restarts);
  HmmFit best;
  bool have = false;
  for (int r = 0; r < restarts; ++r) {
    // Restart 0 uses the deterministic quantile start.
    HmmFit fit = run_em(signal, n_states, r == 0 ? 0 : seed + static_cast<std::uint64_t>(r), options);
    fit.seed = seed;
    if (!have || fit.loglik > best.loglik) {
      best = std::move(fit);
      have = true;
    }
  }
  return best;
}

HmmSelection hmm_select(std::span<const double> signal, std::span<const int> state_range, int restarts,
                        std::uint64_t seed, const HmmOptions& options) {
  if (state_range.empty()) throw InvalidArgument("empty HMM state range");
  HmmSelection sel;
  HmmOptions opt = options;
  opt.restarts = restarts;
  double best_bic = std::numeric_limits<double>::infinity();
  const double log_n = std::log(static_cast<double>(signal.size()));
  for (int k : state_range) {
    const HmmFit fit = hmm_fit(signal, k, seed, opt);
    HmmSelectionRow row;
    row.n_states = k;
    row.loglik = fit.loglik;
    row.n_params = fit.n_params();
    row.bic = -2.0 * fit.loglik + row.n_params * log_n;
    row.degenerate = fit.degenerate;
    if (row.bic < best_bic) {
      best_bic = row.bic;
      sel.best_states = k;
    }
    sel.table.push_back(row);
  }
  return sel;
}

}  // namespace riskphase
