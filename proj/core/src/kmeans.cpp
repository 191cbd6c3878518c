#include "riskphase/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

int cluster_count(std::span<const int> labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  return k;
}

KMeansResult lloyd(std::span<const Point2> pts, int k, std::mt19937_64& rng) {
  const std::size_t n = pts.size();
  const auto K = static_cast<std::size_t>(k);
  KMeansResult r;

  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  r.centroids.push_back(pts[pick(rng)]);
  std::vector<double> d2(n);
  while (r.centroids.size() < K) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& c : r.centroids) m = std::min(m, sq_dist(pts[i], c));
      d2[i] = m;
      total += m;
    }
    if (total <= 0.0) {
      r.centroids.push_back(pts[pick(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng), acc = 0.0;
    std::size_t chosen = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc >= target) {
        chosen = i;
        break;
      }
    }
    r.centroids.push_back(pts[chosen]);
  }

  r.labels.assign(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(pts[i], r.centroids[0]);
      for (std::size_t j = 1; j < K; ++j) {
        const double d = sq_dist(pts[i], r.centroids[j]);
        if (d < bd) {
          bd = d;
          best = static_cast<int>(j);
        }
      }
      if (r.labels[i] != best) changed = true;
      r.labels[i] = best;
      inertia += bd;
    }
    r.inertia_trace.push_back(inertia);
    r.iterations = iter + 1;
    if (!changed && iter > 0) break;

    std::vector<Point2> sum(K, Point2{0.0, 0.0});
    std::vector<std::size_t> cnt(K, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(r.labels[i]);
      sum[j][0] += pts[i][0];
      sum[j][1] += pts[i][1];
      ++cnt[j];
    }
    for (std::size_t j = 0; j < K; ++j) {
      if (cnt[j] > 0) {
        r.centroids[j] = {sum[j][0] / static_cast<double>(cnt[j]), sum[j][1] / static_cast<double>(cnt[j])};
        continue;
      }
      // Empty cluster: move it to the point farthest from its centroid.
      std::size_t far = 0;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = sq_dist(pts[i], r.centroids[static_cast<std::size_t>(r.labels[i])]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      r.centroids[j] = pts[far];
      r.labels[far] = static_cast<int>(j);
    }
  }
  // Final centroids are exact member means of the final labels.
  std::vector<Point2> sum(K, Point2{0.0, 0.0});
  std::vector<std::size_t> cnt(K, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(r.labels[i]);
    sum[j][0] += pts[i][0];
    sum[j][1] += pts[i][1];
    ++cnt[j];
  }
  r.inertia = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    if (cnt[j] > 0) r.centroids[j] = {sum[j][0] / static_cast<double>(cnt[j]), sum[j][1] / static_cast<double>(cnt[j])};
  }
  for (std::size_t i = 0; i < n; ++i) r.inertia += sq_dist(pts[i], r.centroids[static_cast<std::size_t>(r.labels[i])]);
  return r;
}

// Relabel clusters in order of first appearance so equal partitions compare equal.
void canonicalize(KMeansResult& r) {
  std::vector<int> map(r.centroids.size(), -1);
  int next = 0;
  for (int l : r.labels) {
    if (map[static_cast<std::size_t>(l)] < 0) map[static_cast<std::size_t>(l)] = next++;
  }
  for (auto& m : map) {
    if (m < 0) m = next++;
  }
  std::vector<Point2> c(r.centroids.size());
  for (std::size_t j = 0; j < map.size(); ++j) c[static_cast<std::size_t>(map[j])] = r.centroids[j];
  r.centroids = std::move(c);
  for (auto& l : r.labels) l = map[static_cast<std::size_t>(l)];
}

}  // namespace

KMeansResult kmeans(std::span<const Point2> points, int k, std::uint64_t seed, int restarts) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (static_cast<std::size_t>(k) > points.size()) {
    throw KExceedsPoints("k=" + std::to_string(k) + " exceeds " + std::to_string(points.size()) + " points");
  }
  std::mt19937_64 rng(seed);
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeansResult cur = lloyd(points, k, rng);
    if (!have || cur.inertia < best.inertia - 1e-12) {
      best = std::move(cur);
      have = true;
    }
  }
  canonicalize(best);
  return best;
}

double silhouette(std::span<const Point2> points, std::span<const int> labels) {
  const int k = cluster_count(labels);
  if (k < 2) return 0.0;
  const std::size_t n = points.size();
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++size[static_cast<std::size_t>(l)];
  double total = 0.0;
  std::vector<double> dsum(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (size[own] <= 1) continue;
    std::fill(dsum.begin(), dsum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dsum[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(points[i], points[j]));
    }
    const double a = dsum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < dsum.size(); ++c) {
      if (c != own && size[c] > 0) b = std::min(b, dsum[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

double calinski_harabasz(std::span<const Point2> points, std::span<const int> labels) {
  const int k = cluster_count(labels);
  const std::size_t n = points.size();
  if (k < 2 || n <= static_cast<std::size_t>(k)) return 0.0;
  Point2 grand{0.0, 0.0};
  for (const auto& p : points) {
    grand[0] += p[0];
    grand[1] += p[1];
  }
  grand[0] /= static_cast<double>(n);
  grand[1] /= static_cast<double>(n);
  std::vector<Point2> cen(static_cast<std::size_t>(k), Point2{0.0, 0.0});
  std::vector<std::size_t> cnt(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    cen[c][0] += points[i][0];
    cen[c][1] += points[i][1];
    ++cnt[c];
  }
  double between = 0.0, within = 0.0;
  for (std::size_t c = 0; c < cen.size(); ++c) {
    if (cnt[c] == 0) continue;
    cen[c][0] /= static_cast<double>(cnt[c]);
    cen[c][1] /= static_cast<double>(cnt[c]);
    between += static_cast<double>(cnt[c]) * sq_dist(cen[c], grand);
  }
  for (std::size_t i = 0; i < n; ++i) within += sq_dist(points[i], cen[static_cast<std::size_t>(labels[i])]);
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  return between / within * static_cast<double>(n - static_cast<std::size_t>(k)) / static_cast<double>(k - 1);
}

std::string_view to_string(MacroBand band) {
  switch (band) {
    case MacroBand::Low: return "low";
    case MacroBand::Mid: return "mid";
    case MacroBand::High: return "high";
  }
  return "?";
}

std::vector<Point2> cluster_features(const RiskSeries& risk, double trend_weight, double* risk_mean, double* risk_sd,
                                     double* slope_mean, double* slope_sd) {
  auto standardize_or_center = [](std::span<const double> v, double& m, double& s) {
    m = stats::mean(v);
    s = std::sqrt(stats::population_variance(v));
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = s > 0.0 ? (v[i] - m) / s : 0.0;
    if (!(s > 0.0)) s = 1.0;
    return out;
  };
  double rm, rs, sm, ss;
  const auto z = standardize_or_center(risk.z, rm, rs);
  const auto t = standardize_or_center(risk.slope, sm, ss);
  if (risk_mean) *risk_mean = rm;
  if (risk_sd) *risk_sd = rs;
  if (slope_mean) *slope_mean = sm;
  if (slope_sd) *slope_sd = ss;
  std::vector<Point2> f(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) f[i] = {z[i], trend_weight * t[i]};
  return f;
}

ClusterFit kmeans_fit(const RiskSeries& risk, int k, double trend_weight, std::uint64_t seed, int restarts) {
  ClusterFit fit;
  fit.k = k;
  fit.trend_weight = trend_weight;
  fit.features = cluster_features(risk, trend_weight, &fit.risk_mean, &fit.risk_sd, &fit.slope_mean, &fit.slope_sd);
  const KMeansResult r = kmeans(fit.features, k, seed, restarts);
  fit.centroids = r.centroids;
  fit.labels = r.labels;
  fit.inertia = r.inertia;
  fit.inertia_trace = r.inertia_trace;
  fit.silhouette = silhouette(fit.features, fit.labels);
  fit.calinski_harabasz = calinski_harabasz(fit.features, fit.labels);
  return fit;
}

KMeansSelection kmeans_select(const RiskSeries& risk, std::span<const int> k_range, double trend_weight,
                              std::uint64_t seed, int restarts) {
  if (k_range.empty()) throw InvalidArgument("empty k range");
  KMeansSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (int k : k_range) {
    const ClusterFit fit = kmeans_fit(risk, k, trend_weight, seed, restarts);
    sel.table.push_back({k, fit.silhouette, fit.calinski_harabasz, fit.inertia});
    if (fit.silhouette > best) {
      best = fit.silhouette;
      sel.best_k = k;
    }
  }
  return sel;
}

MacroBands macro_bands(const ClusterFit& fit, double low_cut, double high_cut) {
  if (!(low_cut < high_cut)) throw InvalidArgument("macro band cuts must satisfy low < high");
  MacroBands bands;
  for (const auto& c : fit.centroids) {
    const double r = c[0];
    bands.cluster_band.push_back(r <= low_cut ? MacroBand::Low : (r >= high_cut ? MacroBand::High : MacroBand::Mid));
  }
  for (int l : fit.labels) bands.month_band.push_back(bands.cluster_band[static_cast<std::size_t>(l)]);
  return bands;
}

}  // namespace riskphase
