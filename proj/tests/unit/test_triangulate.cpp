#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "riskphase/errors.hpp"
#include "riskphase/hmm.hpp"
#include "riskphase/kmeans.hpp"
#include "riskphase/series.hpp"
#include "support.hpp"

#include "oracles.hpp"

using namespace riskphase;
using namespace testing;

namespace {

double normal_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2 * M_PI * v);
}

// Likelihood by summing over every hidden path.
double brute_loglik(const std::vector<double>& x, const std::vector<double>& mu, const std::vector<double>& var,
                    const std::vector<std::vector<double>>& A, const std::vector<double>& pi) {
  const std::size_t K = mu.size(), T = x.size();
  std::size_t paths = 1;
  for (std::size_t t = 0; t < T; ++t) paths *= K;
  double total = 0;
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t c = code;
    std::vector<std::size_t> s(T);
    for (std::size_t t = 0; t < T; ++t) {
      s[t] = c % K;
      c /= K;
    }
    double p = pi[s[0]] * normal_pdf(x[0], mu[s[0]], var[s[0]]);
    for (std::size_t t = 1; t < T; ++t) p *= A[s[t - 1]][s[t]] * normal_pdf(x[t], mu[s[t]], var[s[t]]);
    total += p;
  }
  return std::log(total);
}

}  // namespace

TEST_CASE("forward-backward loglik equals path enumeration") {
  const std::vector<double> x{-0.3, 0.1, 2.2, 1.9, -0.5, 2.4, 0.0};
  const std::vector<double> mu{0.0, 2.0}, var{0.5, 0.3};
  const std::vector<std::vector<double>> A{{0.8, 0.2}, {0.3, 0.7}};
  const std::vector<double> pi{0.6, 0.4};
  const auto fb = hmm_forward_backward(x, mu, var, A, pi);
  CHECK(fb.loglik == doctest::Approx(brute_loglik(x, mu, var, A, pi)).epsilon(1e-10));
  for (const auto& g : fb.gamma) CHECK(g[0] + g[1] == doctest::Approx(1.0));
  double xi = 0;
  for (const auto& r : fb.xi_sum) xi += r[0] + r[1];
  CHECK(xi == doctest::Approx(static_cast<double>(x.size() - 1)));

  const std::vector<double> mu3{-1, 0.5, 2}, var3{0.4, 0.6, 0.2};
  const std::vector<std::vector<double>> A3{{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.25, 0.25, 0.5}};
  const std::vector<double> pi3{0.2, 0.5, 0.3};
  CHECK(hmm_forward_backward(x, mu3, var3, A3, pi3).loglik ==
        doctest::Approx(brute_loglik(x, mu3, var3, A3, pi3)).epsilon(1e-10));
}

TEST_CASE("EM is monotone and decodes separated regimes") {
  std::mt19937_64 rng(9);
  std::vector<double> x;
  std::vector<int> truth;
  for (int block = 0; block < 6; ++block) {
    const auto part = testing::gaussian(20, block % 2 ? 3.0 : 0.0, 0.5, rng);
    x.insert(x.end(), part.begin(), part.end());
    truth.insert(truth.end(), 20, block % 2);
  }
  HmmOptions opt;
  opt.restarts = 3;
  const auto fit = hmm_fit(x, 2, 42, opt);
  CHECK(fit.monotone);
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) {
    CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-8);
  }
  const int high = fit.means[1] > fit.means[0] ? 1 : 0;
  int hits = 0;
  for (std::size_t t = 0; t < x.size(); ++t) hits += (fit.decoded[t] == high) == (truth[t] == 1);
  CHECK(hits >= 114);
  CHECK_THROWS_AS(hmm_fit(std::vector<double>(5, 0.0), 3, 1), TooManyStates);
}

TEST_CASE("hmm BIC table uses K^2 + 2K - 1 parameters") {
  std::mt19937_64 rng(10);
  const auto x = testing::gaussian(80, 0.0, 1.0, rng);
  const std::vector<int> ks{2, 3};
  const auto sel = hmm_select(x, ks, 2, 7);
  for (const auto& row : sel.table) {
    CHECK(row.n_params == row.n_states * row.n_states + 2 * row.n_states - 1);
    CHECK(row.bic == doctest::Approx(-2 * row.loglik + row.n_params * std::log(80.0)));
  }
}

TEST_CASE("hmm fits are reproducible per seed") {
  std::mt19937_64 rng(12);
  const auto x = testing::gaussian(60, 0.0, 1.0, rng);
  const auto a = hmm_fit(x, 3, 99);
  const auto b = hmm_fit(x, 3, 99);
  CHECK(a.loglik == b.loglik);
  CHECK(a.decoded == b.decoded);
}

TEST_CASE("silhouette and Calinski-Harabasz match direct formulas") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> lab(0, 2);
  std::vector<Point2> pts;
  std::vector<int> labels;
  for (int i = 0; i < 25; ++i) {
    const auto g = testing::gaussian(2, 0.0, 1.0, rng);
    const int l = lab(rng);
    pts.push_back({g[0] + 2.0 * l, g[1]});
    labels.push_back(l);
  }
  CHECK(silhouette(pts, labels) == doctest::Approx(silhouette_oracle(pts, labels)).epsilon(1e-12));

  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p[0];
    cy += p[1];
  }
  cx /= 25;
  cy /= 25;
  double B = 0, W = 0;
  for (int k = 0; k < 3; ++k) {
    double mx = 0, my = 0;
    int m = 0;
    for (int i = 0; i < 25; ++i) {
      if (labels[i] != k) continue;
      mx += pts[i][0];
      my += pts[i][1];
      ++m;
    }
    mx /= m;
    my /= m;
    B += m * ((mx - cx) * (mx - cx) + (my - cy) * (my - cy));
    for (int i = 0; i < 25; ++i) {
      if (labels[i] == k) W += std::pow(pts[i][0] - mx, 2) + std::pow(pts[i][1] - my, 2);
    }
  }
  CHECK(calinski_harabasz(pts, labels) == doctest::Approx(B / W * (25 - 3) / (3 - 1)).epsilon(1e-12));
}

TEST_CASE("k-means inertia never rises and finds separated blobs") {
  std::mt19937_64 rng(14);
  std::vector<Point2> pts;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 15; ++i) {
      const auto g = testing::gaussian(2, 0.0, 0.2, rng);
      pts.push_back({g[0] + 5.0 * c, g[1] - 3.0 * c});
    }
  }
  const auto r = kmeans(pts, 3, 1, 5);
  for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-12);
  for (int c = 0; c < 3; ++c) {
    for (int i = 1; i < 15; ++i) CHECK(r.labels[c * 15 + i] == r.labels[c * 15]);
  }
  CHECK(silhouette(pts, r.labels) > 0.8);
  CHECK_THROWS_AS(kmeans(pts, 50, 1), KExceedsPoints);
}

TEST_CASE("cluster features standardize risk and weight the slope") {
  std::mt19937_64 rng(15);
  const auto raw = testing::gaussian(40, 0.0, 1.0, rng);
  const auto risk = make_risk_series(month_range({2020, 1}, MonthIndex{2020, 1}.plus(39)), raw);
  const auto f = cluster_features(risk, 2.0);
  std::vector<double> a, b;
  for (const auto& p : f) {
    a.push_back(p[0]);
    b.push_back(p[1]);
  }
  double ma = 0, mb = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= 40;
  mb /= 40;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  CHECK(ma == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::sqrt(va / 40) == doctest::Approx(1.0));
  CHECK(std::sqrt(vb / 40) == doctest::Approx(2.0));
  const auto sel = kmeans_select(risk, std::vector<int>{2, 3, 4}, 2.0, 3, 4);
  double best = -1;
  for (const auto& row : sel.table) best = std::max(best, row.silhouette);
  for (const auto& row : sel.table) {
    if (row.k == sel.best_k) CHECK(row.silhouette == best);
  }
}
