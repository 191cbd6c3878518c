#include "riskphase/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "riskphase/errors.hpp"

namespace riskphase {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace {

json numbers(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json matrix(const std::vector<std::vector<double>>& m) {
  json a = json::array();
  for (const auto& row : m) a.push_back(numbers(row));
  return a;
}

template <class T>
json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return number(*v);
  } else {
    return json(*v);
  }
}

double get_number(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

std::vector<double> get_numbers(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_number(v));
  return out;
}

json band_names(const std::vector<MacroBand>& bands) {
  json a = json::array();
  for (auto b : bands) a.push_back(std::string(to_string(b)));
  return a;
}

}  // namespace

namespace stats {
void to_json(json& j, const OlsFit& f) {
  j = {{"intercept", number(f.intercept)}, {"slope", number(f.slope)}, {"slope_se", number(f.slope_se)},
       {"t_stat", number(f.t_stat)},       {"p_value", number(f.p_value)}, {"n", f.n}};
}
}  // namespace stats

void to_json(json& j, const MonthIndex& m) { j = m.str(); }
void from_json(const json& j, MonthIndex& m) { m = MonthIndex::parse(j.get<std::string>()); }

void to_json(json& j, const MonthlyPanel& p) {
  j = {{"months", p.months}, {"raw_count", p.raw_count}, {"nowcast_count", numbers(p.nowcast_count)}};
  if (p.has_exposure()) {
    json e = json::array();
    for (const auto& v : p.exposure) e.push_back(opt(v));
    j["exposure"] = e;
  }
  if (p.has_media()) j["media_index"] = numbers(p.media_index);
  if (p.has_severity()) j["severity_sum"] = numbers(p.severity_sum);
}

void from_json(const json& j, MonthlyPanel& p) {
  p = {};
  p.months = j.at("months").get<std::vector<MonthIndex>>();
  p.raw_count = j.at("raw_count").get<std::vector<long>>();
  p.nowcast_count = get_numbers(j.at("nowcast_count"));
  if (j.contains("exposure")) {
    for (const auto& v : j["exposure"]) {
      p.exposure.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    }
  }
  if (j.contains("media_index")) p.media_index = get_numbers(j["media_index"]);
  if (j.contains("severity_sum")) p.severity_sum = get_numbers(j["severity_sum"]);
  p.validate();
}

void to_json(json& j, const RiskSeries& r) {
  j = {{"months", r.months},
       {"z", numbers(r.z)},
       {"slope", numbers(r.slope)},
       {"window_mean", number(r.window_mean)},
       {"window_sd", number(r.window_sd)},
       {"sd_convention", r.sd_convention}};
}

void from_json(const json& j, RiskSeries& r) {
  r.months = j.at("months").get<std::vector<MonthIndex>>();
  r.z = get_numbers(j.at("z"));
  r.slope = get_numbers(j.at("slope"));
  r.window_mean = j.at("window_mean").get<double>();
  r.window_sd = j.at("window_sd").get<double>();
  r.sd_convention = j.value("sd_convention", "population");
  if (r.z.size() != r.months.size() || r.slope.size() != r.months.size()) {
    throw ParseError("risk series columns differ in length");
  }
}

void to_json(json& j, const DelayModel& m) {
  j = {{"family", std::string(to_string(m.family))},
       {"param1", number(m.param1)},
       {"param2", number(m.param2)},
       {"loglik", number(m.loglik)},
       {"aic", number(m.aic)},
       {"n_params", m.n_params()},
       {"n_valid", m.n_valid},
       {"excluded_fraction", number(m.excluded_fraction)},
       {"zero_shift", number(m.zero_shift)},
       {"n_shifted", m.n_shifted},
       {"degenerate", m.degenerate},
       {"model_mean_days", number(m.model_mean())},
       {"warnings", m.warnings}};
}

void to_json(json& j, const DelaySelection& s) {
  j = {{"best", s.best}, {"candidates", s.candidates}, {"empirical_mean_days", number(s.empirical_mean_days)}};
}

void to_json(json& j, const NowcastAdjustment& n) {
  json inflation = json::array();
  for (int h = 0; h <= n.window_months; ++h) inflation.push_back(number(n.inflation(h)));
  j = {{"window_months", n.window_months},
       {"cdf", numbers(n.cdf)},
       {"inflation", inflation},
       {"cap", n.cap},
       {"percentile", n.percentile}};
}

void to_json(json& j, const ExposureIndex& e) {
  j = {{"months", e.months},
       {"value", numbers(e.value)},
       {"source", e.source == ExposureSource::External ? "external" : "depreciated_installed_base"},
       {"half_life_months", opt(e.half_life_months)}};
  if (e.scale_range) {
    j["scale_range"] = {e.scale_range->first, e.scale_range->second};
  } else {
    j["scale_range"] = nullptr;
  }
}

void to_json(json& j, const ExposureRate& r) {
  j = {{"months", r.months},
       {"rate", numbers(r.rate)},
       {"aggregate_rate", number(r.aggregate_rate)},
       {"mean_monthly_rate", number(r.mean_monthly_rate)},
       {"per", r.per},
       {"trend", r.trend ? json(*r.trend) : json(nullptr)}};
}

void to_json(json& j, const CoefficientRow& c) {
  j = {{"term", c.term},   {"estimate", number(c.estimate)}, {"se", number(c.se)},
       {"z", number(c.z)}, {"p_value", number(c.p_value)},   {"rate_ratio", number(c.rate_ratio)}};
}

void to_json(json& j, const CountModelFit& f) {
  j = {{"family", std::string(to_string(f.family))},
       {"alpha", number(f.alpha)},
       {"coefficients", f.coefficients},
       {"loglik", number(f.loglik)},
       {"pearson_chi2", number(f.pearson_chi2)},
       {"df_resid", number(f.df_resid)},
       {"pearson_dispersion", number(f.pearson_dispersion)},
       {"converged", f.converged},
       {"iterations", f.iterations},
       {"design",
        {{"time_center", f.design.time_center},
         {"time_scale", f.design.time_scale},
         {"media_mean", f.design.media_mean},
         {"media_sd", f.design.media_sd},
         {"offset", f.design.offset},
         {"variance_function", f.design.variance_function}}},
       {"months", f.months},
       {"response", numbers(f.response)},
       {"fitted", numbers(f.fitted)},
       {"offset", numbers(f.offset)}};
}

void to_json(json& j, const DispersionDiagnostics& d) {
  j = {{"pearson_ratio", number(d.pearson_ratio)}, {"overdispersed", d.overdispersed}};
}

void to_json(json& j, const AlphaSearch& a) {
  json curve = json::array();
  for (const auto& p : a.curve) curve.push_back({{"alpha", p.alpha}, {"loglik", opt(p.loglik)}, {"error", p.error}});
  j = {{"best_alpha", a.best_alpha}, {"curve", curve}};
}

void to_json(json& j, const LikelihoodRatio& lr) {
  j = {{"statistic", number(lr.statistic)}, {"p_value", number(lr.p_value)}, {"clamped", lr.clamped}};
}

void to_json(json& j, const ExcessRiskSignal& e) {
  j = {{"months", e.months},
       {"excess", numbers(e.excess)},
       {"degenerate", e.degenerate},
       {"epsilon", e.epsilon},
       {"standardized", e.standardized ? json(*e.standardized) : json(nullptr)}};
}

void to_json(json& j, const Segment& s) {
  j = {{"start", s.start},
       {"end", s.end},
       {"n_months", s.n_months()},
       {"mean", number(s.mean)},
       {"within_slope", number(s.within_slope)},
       {"mean_count", opt(s.mean_count)},
       {"cost", number(s.cost)}};
}

void from_json(const json& j, Segment& s) {
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.mean = j.at("mean").get<double>();
  s.within_slope = j.at("within_slope").get<double>();
  s.mean_count = j.at("mean_count").is_null() ? std::nullopt : std::optional<double>(j["mean_count"].get<double>());
  s.cost = j.value("cost", 0.0);
}

void to_json(json& j, const Segmentation& s) {
  j = {{"penalty", number(s.penalty)},
       {"changepoints", s.changepoints},
       {"segments", s.segments},
       {"total_cost", number(s.total_cost)}};
}

void from_json(const json& j, Segmentation& s) {
  s.penalty = j.at("penalty").get<double>();
  s.changepoints = j.at("changepoints").get<std::vector<std::size_t>>();
  s.segments = j.at("segments").get<std::vector<Segment>>();
  s.total_cost = j.value("total_cost", 0.0);
}

void to_json(json& j, const Plateau& p) {
  j = {{"n_segments", p.n_segments}, {"appearances", p.appearances}, {"rho_lo", p.rho_lo}, {"rho_hi", p.rho_hi}};
}

void to_json(json& j, const PenaltySweep& s) {
  j = {{"grid", numbers(s.grid)},
       {"segment_counts", s.segment_counts},
       {"changepoints", s.changepoints},
       {"plateaus", s.plateaus}};
}

void to_json(json& j, const HmmFit& f) {
  j = {{"n_states", f.n_states},
       {"means", numbers(f.means)},
       {"variances", numbers(f.variances)},
       {"transition", matrix(f.transition)},
       {"initial", numbers(f.initial)},
       {"loglik", number(f.loglik)},
       {"n_params", f.n_params()},
       {"decoded", f.decoded},
       {"posterior", matrix(f.posterior)},
       {"loglik_trace", numbers(f.loglik_trace)},
       {"iterations", f.iterations},
       {"converged", f.converged},
       {"degenerate", f.degenerate},
       {"monotone", f.monotone},
       {"seed", f.seed}};
}

void to_json(json& j, const HmmSelection& s) {
  json rows = json::array();
  for (const auto& r : s.table) {
    rows.push_back({{"n_states", r.n_states},
                    {"loglik", number(r.loglik)},
                    {"n_params", r.n_params},
                    {"bic", number(r.bic)},
                    {"degenerate", r.degenerate}});
  }
  j = {{"best_states", s.best_states}, {"table", rows}};
}

void to_json(json& j, const ClusterFit& f) {
  j = {{"k", f.k},
       {"trend_weight", f.trend_weight},
       {"centroids", f.centroids},
       {"labels", f.labels},
       {"silhouette", number(f.silhouette)},
       {"calinski_harabasz", number(f.calinski_harabasz)},
       {"inertia", number(f.inertia)},
       {"inertia_trace", numbers(f.inertia_trace)},
       {"risk_mean", f.risk_mean},
       {"risk_sd", f.risk_sd},
       {"slope_mean", f.slope_mean},
       {"slope_sd", f.slope_sd}};
}

void to_json(json& j, const KMeansSelection& s) {
  json rows = json::array();
  for (const auto& r : s.table) {
    rows.push_back({{"k", r.k},
                    {"silhouette", number(r.silhouette)},
                    {"calinski_harabasz", number(r.calinski_harabasz)},
                    {"inertia", number(r.inertia)}});
  }
  j = {{"best_k", s.best_k}, {"table", rows}};
}

void to_json(json& j, const MacroBands& b) {
  j = {{"cluster_band", band_names(b.cluster_band)}, {"month_band", band_names(b.month_band)}};
}

void to_json(json& j, const PhaseThresholds& t) {
  j = {{"theta_low", number(t.theta_low)},
       {"theta_high", number(t.theta_high)},
       {"trend_cut", number(t.trend_cut)},
       {"rapid_cut", number(t.rapid_cut)},
       {"spc_mean", number(t.spc_mean)},
       {"spc_sd", number(t.spc_sd)},
       {"spc_epidemic", number(t.spc_epidemic())},
       {"spc_acute", number(t.spc_acute())},
       {"segment_zero_rate", number(t.segment_zero_rate)}};
}

void from_json(const json& j, PhaseThresholds& t) {
  t.theta_low = j.at("theta_low").get<double>();
  t.theta_high = j.at("theta_high").get<double>();
  t.trend_cut = j.value("trend_cut", 0.05);
  t.rapid_cut = j.value("rapid_cut", 0.05);
  t.spc_mean = j.value("spc_mean", 0.0);
  t.spc_sd = j.value("spc_sd", 1.0);
  t.segment_zero_rate = j.value("segment_zero_rate", 0.5);
}

namespace {

template <class Phase>
json phase_block(const std::vector<Phase>& labels, const std::vector<PhaseShare>& dist,
                 const std::vector<std::vector<double>>& transitions, int K) {
  json names = json::array(), lab = json::array(), d = json::array();
  for (int k = 0; k < K; ++k) names.push_back(std::string(to_string(static_cast<Phase>(k))));
  for (auto p : labels) lab.push_back(std::string(to_string(p)));
  for (int k = 0; k < K; ++k) {
    d.push_back({{"phase", names[static_cast<std::size_t>(k)]},
                 {"months", dist[static_cast<std::size_t>(k)].months},
                 {"percent", dist[static_cast<std::size_t>(k)].percent}});
  }
  return {{"phases", names}, {"labels", lab}, {"distribution", d}, {"transition_matrix", matrix(transitions)}};
}

}  // namespace

void to_json(json& j, const PhaseTimeline& t) {
  j = {{"months", t.months},
       {"thresholds", t.thresholds},
       {"six", phase_block(t.six_phase, t.six_distribution, t.six_transitions, kSixPhaseCount)},
       {"three", phase_block(t.three_phase, t.three_distribution, t.three_transitions, kThreePhaseCount)}};
}

void to_json(json& j, const SegmentClassification& s) {
  json segs = json::array();
  for (const auto& sp : s.segments) {
    const std::string name(s.framework == PhaseFramework::Six ? to_string(static_cast<SixPhase>(sp.phase))
                                                              : to_string(static_cast<ThreePhase>(sp.phase)));
    segs.push_back({{"segment", sp.segment}, {"phase", name}});
  }
  j = {{"framework", std::string(to_string(s.framework))}, {"segments", segs}, {"month_labels", s.month_labels}};
}

void to_json(json& j, const AdfResult& a) {
  j = {{"tau", number(a.tau)},       {"lags", a.lags},          {"n_obs", a.n_obs},
       {"crit1", a.crit1},           {"crit5", a.crit5},        {"crit10", a.crit10},
       {"p_band", std::string(to_string(a.p_band))}};
}

void to_json(json& j, const ArimaFit& f) {
  j = {{"order", f.order.str()},
       {"p", f.order.p},
       {"d", f.order.d},
       {"q", f.order.q},
       {"ar", numbers(f.ar)},
       {"ma", numbers(f.ma)},
       {"has_constant", f.has_constant},
       {"mean", number(f.mean)},
       {"sigma2", number(f.sigma2)},
       {"loglik", number(f.loglik)},
       {"aic", number(f.aic)},
       {"n_params", f.n_params},
       {"n_used", f.n_used},
       {"converged", f.converged},
       {"non_invertible", f.non_invertible},
       {"non_stationary", f.non_stationary},
       {"iterations", f.iterations}};
}

void to_json(json& j, const ArimaSelection& s) {
  json rows = json::array();
  for (const auto& r : s.table) {
    rows.push_back({{"order", r.order.str()},
                    {"aic", opt(r.aic)},
                    {"loglik", opt(r.loglik)},
                    {"n_params", r.n_params},
                    {"converged", r.converged},
                    {"non_invertible", r.non_invertible},
                    {"non_stationary", r.non_stationary},
                    {"error", r.error}});
  }
  j = {{"best", s.best}, {"table", rows}};
}

void to_json(json& j, const ForecastBand& b) {
  json phases = json::array();
  for (auto p : b.projected_phase) phases.push_back(std::string(to_string(p)));
  j = {{"months", b.months},
       {"point", numbers(b.point)},
       {"lower95", numbers(b.lower95)},
       {"upper95", numbers(b.upper95)},
       {"projected_phase", phases},
       {"negative_lower", b.negative_lower}};
}

void to_json(json& j, const ImpactResult& r) {
  j = {{"event", r.event},
       {"anchor", r.anchor},
       {"window", r.window},
       {"n_pre", r.n_pre},
       {"n_post", r.n_post},
       {"truncated", r.truncated},
       {"pre_mean", number(r.pre_mean)},
       {"post_mean", number(r.post_mean)},
       {"delta", number(r.delta)},
       {"t_stat", number(r.t_stat)},
       {"df", number(r.df)},
       {"p_raw", number(r.p_raw)},
       {"p_fdr", number(r.p_fdr)},
       {"direction", std::string(to_string(r.direction))}};
}

void to_json(json& j, const ImpactFamily& f) {
  json skipped = json::array();
  for (const auto& [e, why] : f.skipped) skipped.push_back({{"event", e}, {"reason", why}});
  j = {{"method", std::string(to_string(f.method))}, {"results", f.results}, {"skipped", skipped}};
}

void to_json(json& j, const EffectConfusion& c) {
  j = {{"rows", {"mitigation", "shock"}},
       {"columns", {"mitigation", "neutral", "shock"}},
       {"counts", c.counts},
       {"row_totals", c.row_totals},
       {"column_totals", c.column_totals},
       {"total", c.total}};
}

void to_json(json& j, const CcfResult& c) {
  json pts = json::array();
  for (const auto& p : c.points) {
    pts.push_back({{"lag", p.lag}, {"r", number(p.r)}, {"n_overlap", p.n_overlap}, {"bound", number(p.bound)}});
  }
  j = {{"points", pts}, {"best_lag", c.best_lag}, {"best_r", number(c.best_r)}};
}

void to_json(json& j, const PhaseAgreement& a) {
  j = {{"n", a.n},
       {"raw", number(a.raw)},
       {"chance", number(a.chance)},
       {"kappa", number(a.kappa)},
       {"confusion", a.confusion},
       {"excluded_label", opt(a.excluded_label)}};
}

void to_json(json& j, const PartitionAgreement& a) { j = {{"ari", number(a.ari)}, {"nmi", number(a.nmi)}}; }

void to_json(json& j, const InvariantZone& z) {
  j = {{"lo", number(z.lo)}, {"hi", number(z.hi)}, {"lo_open", z.lo_open}, {"hi_open", z.hi_open}};
}

void from_json(const json& j, InvariantZone& z) {
  z.lo = j.at("lo").get<double>();
  z.hi = j.at("hi").get<double>();
  z.lo_open = j.value("lo_open", true);
  z.hi_open = j.value("hi_open", true);
}

void to_json(json& j, const SweepResult& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = number(v);
    rows.push_back({{"value", number(r.value)},
                    {"metrics", m},
                    {"labels", r.labels},
                    {"break_month", opt(r.break_month)},
                    {"n_segments", r.n_segments},
                    {"error", r.error}});
  }
  j = {{"axis", s.axis}, {"grid", numbers(s.grid)}, {"rows", rows}, {"invariant_zones", s.invariant_zones}};
}

void to_json(json& j, const TwoThresholdSweep& s) {
  json cells = json::array();
  for (const auto& row : s.pct_endemic_unmitigated) {
    json r = json::array();
    for (const auto& v : row) r.push_back(opt(v));
    cells.push_back(r);
  }
  j = {{"axis", "theta_low x theta_high"},
       {"grid_low", numbers(s.grid_low)},
       {"grid_high", numbers(s.grid_high)},
       {"pct_endemic_unmitigated", cells},
       {"low_axis_flat", s.low_axis_flat},
       {"high_axis_flat", s.high_axis_flat}};
}

std::string canonical_dump(const json& j) { return j.dump() + "\n"; }

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

}  // namespace riskphase
