#include "riskphase/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  if (a.size() < 3) throw InvalidArgument("pearson: needs at least three pairs");
  const double ma = stats::mean(a), mb = stats::mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw ConstantInput("pearson: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CcfResult lagged_ccf(std::span<const double> a, std::span<const double> b, int max_lag) {
  if (a.size() != b.size()) throw InvalidArgument("lagged_ccf: length mismatch");
  if (max_lag < 0) throw InvalidArgument("lagged_ccf: negative max lag");
  CcfResult out;
  bool any = false;
  const auto n = static_cast<long>(a.size());
  for (int k = -max_lag; k <= max_lag; ++k) {
    const long lo = std::max(0L, -static_cast<long>(k));
    const long hi = std::min(n, n - k);
    if (hi - lo < 3) continue;
    const auto len = static_cast<std::size_t>(hi - lo);
    const auto sa = a.subspan(static_cast<std::size_t>(lo), len);
    const auto sb = b.subspan(static_cast<std::size_t>(lo + k), len);
    double r = 0.0;
    try {
      r = pearson(sa, sb);
    } catch (const ConstantInput&) {
      continue;
    }
    out.points.push_back({k, r, len, 1.96 / std::sqrt(static_cast<double>(len))});
    if (!any || r > out.best_r) {
      out.best_r = r;
      out.best_lag = k;
      any = true;
    }
  }
  if (!any) throw ConstantInput("lagged_ccf: no lag with a defined correlation");
  return out;
}

std::vector<double> minmax_scale(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("minmax_scale: empty input");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw ConstantInput("minmax_scale: constant input");
  std::vector<double> out;
  for (double v : x) out.push_back((v - *lo) / range);
  return out;
}

PhaseAgreement phase_agreement(std::span<const int> p1, std::span<const int> p2, int n_categories,
                               std::optional<int> exclude) {
  if (p1.size() != p2.size()) throw InvalidArgument("phase_agreement: length mismatch");
  if (n_categories < 1) throw InvalidArgument("phase_agreement: no categories");
  const auto K = static_cast<std::size_t>(n_categories);
  PhaseAgreement out;
  out.excluded_label = exclude;
  out.confusion.assign(K, std::vector<int>(K, 0));
  std::vector<double> m1(K, 0.0), m2(K, 0.0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (p1[i] < 0 || p1[i] >= n_categories || p2[i] < 0 || p2[i] >= n_categories) {
      throw InvalidArgument("phase_agreement: label out of range");
    }
    if (exclude && p1[i] == *exclude) continue;
    ++out.confusion[static_cast<std::size_t>(p1[i])][static_cast<std::size_t>(p2[i])];
    m1[static_cast<std::size_t>(p1[i])] += 1.0;
    m2[static_cast<std::size_t>(p2[i])] += 1.0;
    if (p1[i] == p2[i]) ++agree;
    ++out.n;
  }
  if (out.n == 0) throw InvalidArgument("phase_agreement: no months to compare");
  const double n = static_cast<double>(out.n);
  out.raw = static_cast<double>(agree) / n;
  for (std::size_t k = 0; k < K; ++k) out.chance += (m1[k] / n) * (m2[k] / n);
  if (out.chance < 1.0) {
    out.kappa = (out.raw - out.chance) / (1.0 - out.chance);
  } else {
    out.kappa = out.raw == 1.0 ? 1.0 : 0.0;
  }
  return out;
}

namespace {

std::vector<int> relabel(std::span<const int> l, int& count) {
  std::map<int, int> ids;
  std::vector<int> out;
  for (int v : l) {
    auto [it, inserted] = ids.try_emplace(v, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  count = static_cast<int>(ids.size());
  return out;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

PartitionAgreement partition_agreement(std::span<const int> l1, std::span<const int> l2) {
  if (l1.size() != l2.size()) throw InvalidArgument("partition_agreement: length mismatch");
  if (l1.empty()) throw InvalidArgument("partition_agreement: empty labels");
  int k1 = 0, k2 = 0;
  const auto a = relabel(l1, k1);
  const auto b = relabel(l2, k2);
  std::vector<std::vector<double>> table(static_cast<std::size_t>(k1), std::vector<double>(static_cast<std::size_t>(k2), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1.0;
  std::vector<double> rows(static_cast<std::size_t>(k1), 0.0), cols(static_cast<std::size_t>(k2), 0.0);
  double sum_ij = 0.0;
  for (int i = 0; i < k1; ++i)
    for (int j = 0; j < k2; ++j) {
      const double v = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      rows[static_cast<std::size_t>(i)] += v;
      cols[static_cast<std::size_t>(j)] += v;
      sum_ij += choose2(v);
    }
  double sum_a = 0.0, sum_b = 0.0;
  for (double v : rows) sum_a += choose2(v);
  for (double v : cols) sum_b += choose2(v);
  const double n = static_cast<double>(a.size());
  const double total = choose2(n);
  PartitionAgreement out;
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    out.ari = a == b ? 1.0 : 0.0;
  } else {
    out.ari = (sum_ij - expected) / denom;
  }

  double h1 = 0.0, h2 = 0.0, mi = 0.0;
  for (double v : rows) if (v > 0.0) h1 -= v / n * std::log(v / n);
  for (double v : cols) if (v > 0.0) h2 -= v / n * std::log(v / n);
  for (int i = 0; i < k1; ++i)
    for (int j = 0; j < k2; ++j) {
      const double v = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v > 0.0) mi += v / n * std::log(v * n / (rows[static_cast<std::size_t>(i)] * cols[static_cast<std::size_t>(j)]));
    }
  const double norm = 0.5 * (h1 + h2);
  out.nmi = norm > 0.0 ? std::clamp(mi / norm, 0.0, 1.0) : 1.0;
  return out;
}

double aligned_accuracy(std::span<const int> l1, std::span<const int> l2) {
  if (l1.size() != l2.size() || l1.empty()) throw InvalidArgument("aligned_accuracy: bad lengths");
  int k1 = 0, k2 = 0;
  const auto a = relabel(l1, k1);
  const auto b = relabel(l2, k2);
  const int k = std::max(k1, k2);
  if (k > 8) throw InvalidArgument("aligned_accuracy: more than eight labels");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hits += perm[static_cast<std::size_t>(b[i])] == a[i] ? 1 : 0;
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(a.size());
}

AlignedSeries align_months(std::span<const MonthIndex> ma, std::span<const double> a, std::span<const MonthIndex> mb,
                           std::span<const double> b) {
  if (ma.size() != a.size() || mb.size() != b.size()) throw InvalidArgument("align_months: length mismatch");
  std::map<MonthIndex, double> right;
  for (std::size_t i = 0; i < mb.size(); ++i) right[mb[i]] = b[i];
  AlignedSeries out;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    auto it = right.find(ma[i]);
    if (it == right.end()) continue;
    out.months.push_back(ma[i]);
    out.a.push_back(a[i]);
    out.b.push_back(it->second);
  }
  return out;
}

}  // namespace riskphase
