#include "riskphase/delay.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>

#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct WeibullProfile {
  std::span<const double> x;
  std::span<const double> logx;
  double sum_logx = 0.0;

  // Profile log-likelihood at shape k with scale at its conditional MLE.
  double operator()(double k) const {
    const double n = static_cast<double>(x.size());
    // scale^k = mean(x^k); computed in log space for stability.
    double max_l = -std::numeric_limits<double>::infinity();
    for (double lx : logx) max_l = std::max(max_l, k * lx);
    double acc = 0.0;
    for (double lx : logx) acc += std::exp(k * lx - max_l);
    const double log_mean_xk = max_l + std::log(acc / n);
    return n * std::log(k) - n * log_mean_xk + (k - 1.0) * sum_logx - n;
  }
};

}  // namespace

LagSample compute_lags(const std::vector<IncidentRecord>& records) {
  LagSample out;
  for (const auto& r : records) {
    for (const auto& report : r.report_dates) {
      ++out.total;
      const int lag = days_between(r.incident_date, report);
      if (lag < 0 || lag > kMaxLagDays) {
        ++out.excluded;
      } else {
        out.days.push_back(static_cast<double>(lag));
      }
    }
  }
  return out;
}

std::string_view to_string(DelayFamily family) {
  switch (family) {
    case DelayFamily::Lognormal: return "lognormal";
    case DelayFamily::Exponential: return "exponential";
    case DelayFamily::Weibull: return "weibull";
  }
  return "?";
}

double DelayModel::model_mean() const {
  switch (family) {
    case DelayFamily::Lognormal: return std::exp(param1 + 0.5 * param2 * param2);
    case DelayFamily::Exponential: return 1.0 / param1;
    case DelayFamily::Weibull: return param2 * std::tgamma(1.0 + 1.0 / param1);
  }
  return 0.0;
}

DelayModel fit_delay(std::span<const double> lag_days, DelayFamily family, const DelayFitOptions& options) {
  if (lag_days.size() < options.min_n) {
    throw InsufficientData("delay fit needs at least " + std::to_string(options.min_n) + " lags, got " +
                           std::to_string(lag_days.size()));
  }
  DelayModel m;
  m.family = family;
  m.zero_shift = options.zero_shift;

  std::vector<double> x;
  x.reserve(lag_days.size());
  for (double d : lag_days) {
    if (d == 0.0 && options.zero_shift > 0.0) {
      x.push_back(options.zero_shift);
      ++m.n_shifted;
    } else if (!(d > 0.0)) {
      throw NonPositiveLag("non-positive lag " + std::to_string(d) + " reached the " +
                           std::string(to_string(family)) + " fitter");
    } else {
      x.push_back(d);
    }
  }
  const double n = static_cast<double>(x.size());
  m.n_valid = x.size();
  if (x.size() < options.small_sample_n) {
    m.warnings.push_back("small sample (n=" + std::to_string(x.size()) + "): fit is near-degenerate");
  }

  std::vector<double> logx(x.size());
  std::transform(x.begin(), x.end(), logx.begin(), [](double v) { return std::log(v); });
  double sum_logx = 0.0;
  for (double v : logx) sum_logx += v;

  switch (family) {
    case DelayFamily::Lognormal: {
      const double mu = sum_logx / n;
      double ss = 0.0;
      for (double v : logx) ss += (v - mu) * (v - mu);
      double sigma = std::sqrt(ss / n);
      constexpr double kSigmaFloor = 1e-6;
      if (sigma < kSigmaFloor) {
        m.degenerate = true;
        m.warnings.push_back("lognormal sigma at boundary (point mass); floored at 1e-6");
        sigma = kSigmaFloor;
      }
      m.param1 = mu;
      m.param2 = sigma;
      double ll = 0.0;
      for (double v : logx) {
        const double r = (v - mu) / sigma;
        ll += -v - std::log(sigma) - 0.5 * kLog2Pi - 0.5 * r * r;
      }
      m.loglik = ll;
      break;
    }
    case DelayFamily::Exponential: {
      double sum = 0.0;
      for (double v : x) sum += v;
      const double rate = n / sum;
      m.param1 = rate;
      m.loglik = n * std::log(rate) - rate * sum;
      break;
    }
    case DelayFamily::Weibull: {
      const WeibullProfile profile{x, logx, sum_logx};
      // Brent on log-shape; the profile is smooth and unimodal in k.
      auto neg = [&](double log_k) { return -profile(std::exp(log_k)); };
      const auto [log_k, neg_ll] =
          boost::math::tools::brent_find_minima(neg, std::log(1e-3), std::log(1e3), 40);
      const double k = std::exp(log_k);
      double max_l = -std::numeric_limits<double>::infinity();
      for (double lx : logx) max_l = std::max(max_l, k * lx);
      double acc = 0.0;
      for (double lx : logx) acc += std::exp(k * lx - max_l);
      const double log_scale = (max_l + std::log(acc / n)) / k;
      m.param1 = k;
      m.param2 = std::exp(log_scale);
      m.loglik = -neg_ll;
      if (k > 999.0) {
        m.degenerate = true;
        m.warnings.push_back("weibull shape at search boundary (point mass)");
      }
      break;
    }
  }
  m.aic = 2.0 * m.n_params() - 2.0 * m.loglik;
  return m;
}

DelaySelection select_delay_model(std::span<const double> lag_days, const DelayFitOptions& options) {
  DelaySelection sel;
  for (auto family : {DelayFamily::Lognormal, DelayFamily::Exponential, DelayFamily::Weibull}) {
    sel.candidates.push_back(fit_delay(lag_days, family, options));
  }
  sel.best = sel.candidates.front();
  for (const auto& c : sel.candidates) {
    if (c.aic < sel.best.aic) sel.best = c;
  }
  sel.empirical_mean_days = stats::mean(lag_days);
  return sel;
}

std::vector<int> lags_to_months(std::span<const double> lag_days) {
  std::vector<int> out;
  out.reserve(lag_days.size());
  for (double d : lag_days) out.push_back(static_cast<int>(std::floor(d / kDaysPerMonth)));
  return out;
}

double NowcastAdjustment::inflation(int horizon) const {
  if (horizon < 0) throw InvalidArgument("negative nowcast horizon");
  if (horizon > window_months) return 1.0;
  const double f = cdf[static_cast<std::size_t>(horizon)];
  if (!(f > 0.0)) return cap;
  return std::clamp(1.0 / f, 1.0, cap);
}

NowcastAdjustment build_nowcast(std::span<const int> lag_months, double percentile, double cap) {
  if (lag_months.empty()) throw InvalidArgument("build_nowcast: empty lag list");
  if (!(cap >= 1.0)) throw InvalidArgument("nowcast cap must be >= 1");
  std::vector<double> as_double(lag_months.begin(), lag_months.end());
  NowcastAdjustment adj;
  adj.cap = cap;
  adj.percentile = percentile;
  // Tolerance absorbs interpolation round-off on exact integer quantiles.
  adj.window_months = std::max(0, static_cast<int>(std::ceil(stats::quantile_type7(as_double, percentile) - 1e-9)));
  adj.cdf.assign(static_cast<std::size_t>(adj.window_months) + 1, 0.0);
  const double n = static_cast<double>(lag_months.size());
  for (int h = 0; h <= adj.window_months; ++h) {
    const auto count = std::count_if(lag_months.begin(), lag_months.end(), [h](int l) { return l <= h; });
    adj.cdf[static_cast<std::size_t>(h)] = static_cast<double>(count) / n;
  }
  return adj;
}

MonthlyPanel apply_nowcast(const MonthlyPanel& panel, const NowcastAdjustment& adj, MonthIndex as_of) {
  if (panel.months.empty()) return panel;
  if (as_of < panel.months.back()) throw InvalidArgument("nowcast as_of precedes the last panel month");
  MonthlyPanel out = panel;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int h = months_between(out.months[i], as_of);
    out.nowcast_count[i] = static_cast<double>(out.raw_count[i]) * adj.inflation(h);
  }
  return out;
}

}  // namespace riskphase
