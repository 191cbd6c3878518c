#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "riskphase/series.hpp"

namespace riskphase {

using Point2 = std::array<double, 2>;

struct KMeansResult {
  std::vector<Point2> centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // per Lloyd iteration of the kept restart
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding; best of `restarts` by inertia.
/// Throws KExceedsPoints when k > n.
KMeansResult kmeans(std::span<const Point2> points, int k, std::uint64_t seed, int restarts = 10);

/// Mean silhouette; singleton clusters contribute 0. Returns 0 for k < 2.
double silhouette(std::span<const Point2> points, std::span<const int> labels);
/// Between/within dispersion ratio scaled by (n-k)/(k-1). Returns 0 for k < 2.
double calinski_harabasz(std::span<const Point2> points, std::span<const int> labels);

enum class MacroBand { Low, Mid, High };
std::string_view to_string(MacroBand band);

struct ClusterFit {
  int k = 0;
  double trend_weight = 2.0;
  std::vector<Point2> features;   // (z', w * slope') per month
  std::vector<Point2> centroids;  // in feature space
  std::vector<int> labels;
  double silhouette = 0.0;
  double calinski_harabasz = 0.0;
  double inertia = 0.0;
  std::vector<double> inertia_trace;
  // Standardization constants of the two raw features.
  double risk_mean = 0.0, risk_sd = 1.0, slope_mean = 0.0, slope_sd = 1.0;
};

/// Features are the risk z and its rolling slope, each standardized
/// independently, with the slope multiplied by `trend_weight`.
std::vector<Point2> cluster_features(const RiskSeries& risk, double trend_weight, double* risk_mean = nullptr,
                                     double* risk_sd = nullptr, double* slope_mean = nullptr,
                                     double* slope_sd = nullptr);

ClusterFit kmeans_fit(const RiskSeries& risk, int k, double trend_weight, std::uint64_t seed, int restarts = 10);

struct KMeansSelectionRow {
  int k = 0;
  double silhouette = 0.0;
  double calinski_harabasz = 0.0;
  double inertia = 0.0;
};

struct KMeansSelection {
  int best_k = 0;  // argmax silhouette
  std::vector<KMeansSelectionRow> table;
};

KMeansSelection kmeans_select(const RiskSeries& risk, std::span<const int> k_range, double trend_weight,
                              std::uint64_t seed, int restarts = 10);

struct MacroBands {
  std::vector<MacroBand> cluster_band;  // per cluster, from the centroid risk coordinate
  std::vector<MacroBand> month_band;
};

/// Low at or below `low_cut`, high at or above `high_cut`, mid otherwise.
MacroBands macro_bands(const ClusterFit& fit, double low_cut = -0.5, double high_cut = 0.5);

}  // namespace riskphase
