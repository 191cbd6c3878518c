#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace riskphase {

struct HmmOptions {
  int max_iter = 500;
  double tol = 1e-8;  // absolute loglik gain
  double variance_floor = 1e-4;
  int restarts = 1;
  /// Any decoded-state emission density above this marks the fit degenerate.
  double degenerate_density = 8.0;
};

/// Univariate Gaussian-emission HMM fitted by Baum-Welch.
struct HmmFit {
  int n_states = 0;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::vector<double>> transition;  // row-stochastic K x K
  std::vector<double> initial;
  double loglik = 0.0;
  std::vector<std::vector<double>> posterior;  // T x K
  std::vector<int> decoded;                    // argmax posterior
  std::vector<double> loglik_trace;            // one entry per EM iteration
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
  bool monotone = true;  // loglik never decreased beyond round-off
  std::uint64_t seed = 0;

  int n_params() const { return n_states * n_states + 2 * n_states - 1; }
};

struct ForwardBackward {
  std::vector<std::vector<double>> gamma;  // T x K
  /// Expected transition counts summed over t.
  std::vector<std::vector<double>> xi_sum;
  double loglik = 0.0;
};

/// Scaled forward-backward pass for fixed parameters.
ForwardBackward hmm_forward_backward(std::span<const double> x, const std::vector<double>& means,
                                     const std::vector<double>& variances,
                                     const std::vector<std::vector<double>>& transition,
                                     const std::vector<double>& initial);

/// Best of `options.restarts` EM runs. Throws TooManyStates when n <= 2K.
HmmFit hmm_fit(std::span<const double> signal, int n_states, std::uint64_t seed, const HmmOptions& options = {});

struct HmmSelectionRow {
  int n_states = 0;
  double loglik = 0.0;
  int n_params = 0;
  double bic = 0.0;
  bool degenerate = false;
};

struct HmmSelection {
  int best_states = 0;  // argmin BIC
  std::vector<HmmSelectionRow> table;
};

/// BIC = -2 loglik + (K^2 + 2K - 1) ln n over the given state counts.
HmmSelection hmm_select(std::span<const double> signal, std::span<const int> state_range, int restarts,
                        std::uint64_t seed, const HmmOptions& options = {});

}  // namespace riskphase
