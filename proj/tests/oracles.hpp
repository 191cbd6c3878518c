#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riskphase/kmeans.hpp"
#include "riskphase/phases.hpp"

// Direct, unoptimized reference computations shared by the unit and acceptance suites.
namespace testing {

/// Exhaustive O(n^2) optimal partitioning under L2 cost.
inline double exhaustive_optimum(const std::vector<double>& x, double beta, std::size_t min_seg) {
  const std::size_t n = x.size();
  auto cost = [&](std::size_t a, std::size_t b) {
    double m = 0;
    for (std::size_t i = a; i < b; ++i) m += x[i];
    m /= static_cast<double>(b - a);
    double c = 0;
    for (std::size_t i = a; i < b; ++i) c += (x[i] - m) * (x[i] - m);
    return c;
  };
  std::vector<double> F(n + 1, std::numeric_limits<double>::infinity());
  F[0] = -beta;
  for (std::size_t t = min_seg; t <= n; ++t) {
    for (std::size_t s = 0; s + min_seg <= t; ++s) {
      if (s != 0 && s < min_seg) continue;
      if (!std::isfinite(F[s])) continue;
      F[t] = std::min(F[t], F[s] + cost(s, t) + beta);
    }
  }
  return F[n];
}

struct PartitionOracle {
  double ari = 0, nmi = 0;
};

/// Pair enumeration for ARI; plug-in entropies for NMI.
inline PartitionOracle partition_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double same_a = 0, same_b = 0, both = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      pairs += 1;
      same_a += a[i] == a[j];
      same_b += b[i] == b[j];
      both += a[i] == a[j] && b[i] == b[j];
    }
  }
  const double expected = pairs > 0 ? same_a * same_b / pairs : 0.0;
  const double top = 0.5 * (same_a + same_b) - expected;
  bool same_partition = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) same_partition = same_partition && ((a[i] == a[j]) == (b[i] == b[j]));
  }
  PartitionOracle o;
  o.ari = top == 0 ? (same_partition ? 1.0 : 0.0) : (both - expected) / top;
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pj;
  for (std::size_t i = 0; i < n; ++i) {
    pa[a[i]] += 1.0;
    pb[b[i]] += 1.0;
    pj[{a[i], b[i]}] += 1.0;
  }
  for (auto* m : {&pa, &pb}) {
    for (auto& [k, c] : *m) c /= static_cast<double>(n);
  }
  for (auto& [k, c] : pj) c /= static_cast<double>(n);
  double ha = 0, hb = 0, mi = 0;
  for (auto [k, p] : pa) ha -= p * std::log(p);
  for (auto [k, p] : pb) hb -= p * std::log(p);
  for (auto [k, p] : pj) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  o.nmi = (ha == 0 && hb == 0) ? 1.0 : (ha + hb == 0 ? 0.0 : mi / (0.5 * (ha + hb)));
  return o;
}

struct KappaOracle {
  double raw = 0, chance = 0, kappa = 0;
};

inline KappaOracle kappa_oracle(const std::vector<int>& a, const std::vector<int>& b, int k) {
  const double n = static_cast<double>(a.size());
  KappaOracle o;
  for (std::size_t i = 0; i < a.size(); ++i) o.raw += (a[i] == b[i]) / n;
  for (int c = 0; c < k; ++c) {
    const double pa = static_cast<double>(std::count(a.begin(), a.end(), c)) / n;
    const double pb = static_cast<double>(std::count(b.begin(), b.end(), c)) / n;
    o.chance += pa * pb;
  }
  o.kappa = o.chance < 1 ? (o.raw - o.chance) / (1 - o.chance) : (o.raw == 1 ? 1.0 : 0.0);
  return o;
}

/// Mean silhouette; singletons score 0.
inline double silhouette_oracle(const std::vector<riskphase::Point2>& pts, const std::vector<int>& lab) {
  const std::size_t n = pts.size();
  auto d = [&](std::size_t i, std::size_t j) { return std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]); };
  std::set<int> ks(lab.begin(), lab.end());
  if (ks.size() < 2) return 0.0;
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t own = 0;
    double a = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && lab[j] == lab[i]) {
        a += d(i, j);
        ++own;
      }
    }
    if (own == 0) continue;
    a /= static_cast<double>(own);
    double b = 1e300;
    for (int k : ks) {
      if (k == lab[i]) continue;
      double s = 0;
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (lab[j] == k) {
          s += d(i, j);
          ++m;
        }
      }
      b = std::min(b, s / static_cast<double>(m));
    }
    const double den = std::max(a, b);
    sum += den > 0 ? (b - a) / den : 0.0;
  }
  return sum / static_cast<double>(n);
}

/// Six-phase rule table, first match wins.
inline riskphase::SixPhase six_phase_oracle(double count, double r, double tau, double lo, double hi,
                                            double cut = 0.05) {
  using riskphase::SixPhase;
  if (count == 0) return SixPhase::NoEvidencedOccurrence;
  if (r < lo && tau <= cut) return SixPhase::RareMitigated;
  if (r < lo && tau > cut) return SixPhase::RareOccurrence;
  if (r >= lo && r < hi && tau <= cut) return SixPhase::EndemicMitigated;
  if (tau > cut) return SixPhase::RapidExpansion;
  return SixPhase::EndemicUnmitigated;
}

/// ARMA(1,1) innovations after a burn-in, optionally integrated once.
inline std::vector<double> arima_path(std::size_t n, double phi, double theta, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> w;
  double prev_w = 0, prev_e = 0;
  for (std::size_t t = 0; t < n + 50; ++t) {
    const double e = g(rng);
    const double v = phi * prev_w + e + theta * prev_e;
    prev_w = v;
    prev_e = e;
    if (t >= 50) w.push_back(v);
  }
  if (d == 0) return w;
  std::vector<double> x;
  double level = 0;
  for (double v : w) x.push_back(level += v);
  return x;
}

struct CountSim {
  Eigen::MatrixXd X;
  std::vector<double> y, off;
};

/// Intercept plus two standard-normal covariates, log-uniform offset; gamma mixing when alpha > 0.
inline CountSim simulate_counts(std::size_t n, const Eigen::Vector3d& beta, double alpha, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(1.0, 3.0);
  CountSim s;
  s.X.resize(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    s.X(r, 0) = 1.0;
    s.X(r, 1) = g(rng);
    s.X(r, 2) = g(rng);
    s.off.push_back(std::log(u(rng)));
    double mu = std::exp(s.X.row(r).dot(beta) + s.off.back());
    if (alpha > 0) mu *= std::gamma_distribution<double>(1.0 / alpha, alpha)(rng);
    s.y.push_back(std::poisson_distribution<int>(mu)(rng));
  }
  return s;
}

}  // namespace testing
