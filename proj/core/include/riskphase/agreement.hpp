#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "riskphase/month.hpp"

namespace riskphase {

/// Sample correlation. Needs equal lengths >= 3; throws ConstantInput.
double pearson(std::span<const double> a, std::span<const double> b);

struct CcfPoint {
  int lag = 0;
  double r = 0.0;
  std::size_t n_overlap = 0;
  double bound = 0.0;  // 1.96 / sqrt(n_overlap)
};

struct CcfResult {
  std::vector<CcfPoint> points;  // lags -L..+L with at least three overlapping pairs
  int best_lag = 0;
  double best_r = 0.0;
};

/// r(k) = corr(a_t, b_{t+k}) over the overlapping window; best is the largest signed r.
CcfResult lagged_ccf(std::span<const double> a, std::span<const double> b, int max_lag = 6);

/// Maps onto [0, 1]; throws ConstantInput.
std::vector<double> minmax_scale(std::span<const double> x);

struct PhaseAgreement {
  std::size_t n = 0;
  double raw = 0.0;
  double chance = 0.0;
  double kappa = 0.0;
  std::vector<std::vector<int>> confusion;  // rows p1, columns p2
  std::optional<int> excluded_label;
};

/// Cohen's kappa and confusion over equal-length label sequences in [0, n_categories).
/// When `exclude` is set, months where p1 carries that label are dropped first.
PhaseAgreement phase_agreement(std::span<const int> p1, std::span<const int> p2, int n_categories,
                               std::optional<int> exclude = std::nullopt);

struct PartitionAgreement {
  double ari = 0.0;
  double nmi = 0.0;
};

/// ARI by pair counting with the expected-index correction; NMI with the
/// arithmetic mean of entropies. A zero ARI denominator gives 1 for identical
/// partitions and 0 otherwise; two zero entropies give NMI 1.
PartitionAgreement partition_agreement(std::span<const int> l1, std::span<const int> l2);

/// Best one-to-one relabelling of l2 onto l1 (exhaustive up to 8 labels), as accuracy.
double aligned_accuracy(std::span<const int> l1, std::span<const int> l2);

struct AlignedSeries {
  std::vector<MonthIndex> months;
  std::vector<double> a;
  std::vector<double> b;
};

/// Inner join of two monthly series on month.
AlignedSeries align_months(std::span<const MonthIndex> ma, std::span<const double> a, std::span<const MonthIndex> mb,
                           std::span<const double> b);

}  // namespace riskphase
