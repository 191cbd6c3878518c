#include "riskphase/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "riskphase/agreement.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/exposure.hpp"
#include "riskphase/hmm.hpp"
#include "riskphase/kmeans.hpp"
#include "riskphase/run_store.hpp"
#include "riskphase/sensitivity.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

// ---- config parsing ----

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config key '") + key + "': " + e.what());
  }
}

std::optional<double> get_number_or_auto(const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (obj[key].is_string() && obj[key].get<std::string>() == "auto") return std::nullopt;
  if (!obj[key].is_number()) throw InvalidArgument(std::string("config key '") + key + "' must be a number or \"auto\"");
  return obj[key].get<double>();
}

std::optional<MonthWindow> get_window(const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  const auto& w = obj[key];
  if (w.is_string() && w.get<std::string>() == "auto") return std::nullopt;
  if (!w.is_object() || !w.contains("from") || !w.contains("to")) {
    throw InvalidArgument(std::string("config key '") + key + "' needs {\"from\", \"to\"}");
  }
  MonthWindow out{MonthIndex::parse(w["from"].get<std::string>()), MonthIndex::parse(w["to"].get<std::string>())};
  if (out.second < out.first) throw InvalidArgument(std::string("config key '") + key + "': to precedes from");
  return out;
}

std::optional<std::filesystem::path> get_path(const json& inputs, const char* key) {
  if (!inputs.contains(key) || inputs[key].is_null()) return std::nullopt;
  return std::filesystem::path(inputs[key].get<std::string>());
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key) || doc[key].is_null()) return empty;
  if (!doc[key].is_object()) throw InvalidArgument(std::string("config section '") + key + "' must be an object");
  return doc[key];
}

}  // namespace

PipelineConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  PipelineConfig cfg;
  cfg.source = doc;
  cfg.base_dir = base_dir;
  cfg.domain = get_or<std::string>(doc, "domain", "domain");
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0);

  const auto& in = section(doc, "inputs");
  cfg.inputs.incidents = get_path(in, "incidents");
  cfg.inputs.exposure = get_path(in, "exposure");
  cfg.inputs.media = get_path(in, "media");
  cfg.inputs.stars = get_path(in, "stars");
  cfg.inputs.interventions = get_path(in, "interventions");
  cfg.inputs.second_source = get_path(in, "second_source");
  if (!cfg.inputs.incidents) throw InvalidArgument("config needs inputs.incidents");

  const auto& ing = section(doc, "ingest");
  if (ing.contains("subdomain")) cfg.ingest.filter.subdomain = ing["subdomain"].get<std::string>();
  if (ing.contains("group")) cfg.ingest.filter.group = ing["group"].get<std::string>();
  if (ing.contains("date_min")) cfg.ingest.filter.date_min = parse_date(ing["date_min"].get<std::string>());
  if (ing.contains("date_max")) cfg.ingest.filter.date_max = parse_date(ing["date_max"].get<std::string>());
  cfg.ingest.filter.keyword_includes = get_or<std::vector<std::string>>(ing, "include", {});
  cfg.ingest.filter.keyword_excludes = get_or<std::vector<std::string>>(ing, "exclude", {});
  cfg.ingest.basis = parse_count_basis(get_or<std::string>(ing, "count_basis", "incident-date"));
  cfg.ingest.groups = get_or<std::vector<std::string>>(ing, "groups", {});
  if (ing.contains("severity_weights")) {
    for (const auto& [k, v] : ing["severity_weights"].items()) cfg.ingest.severity_weights[parse_severity(k)] = v.get<double>();
  }

  if (doc.contains("delay")) {
    const auto& s = section(doc, "delay");
    DelayConfig d;
    d.percentile = get_or(s, "percentile", d.percentile);
    d.cap = get_or(s, "cap", d.cap);
    if (s.contains("as_of") && !s["as_of"].is_null()) d.as_of = parse_date(s["as_of"].get<std::string>());
    d.fit.zero_shift = get_or(s, "zero_shift", d.fit.zero_shift);
    d.fit.min_n = get_or<std::size_t>(s, "min_n", d.fit.min_n);
    if (!(d.percentile > 0.0 && d.percentile < 1.0)) throw InvalidArgument("delay.percentile must lie in (0, 1)");
    if (!(d.cap >= 1.0)) throw InvalidArgument("delay.cap must be at least 1");
    cfg.delay = d;
  }
  if (doc.contains("exposure")) {
    const auto& s = section(doc, "exposure");
    ExposureConfig e;
    e.source = get_or<std::string>(s, "source", cfg.inputs.exposure && !cfg.inputs.stars ? "external" : "stars");
    e.half_life = get_or(s, "half_life", e.half_life);
    e.scale = get_or(s, "scale", e.scale);
    if (s.contains("scale_range")) {
      const auto r = s["scale_range"].get<std::vector<double>>();
      if (r.size() != 2 || !(r[0] < r[1])) throw InvalidArgument("exposure.scale_range needs [lo, hi]");
      e.scale_lo = r[0];
      e.scale_hi = r[1];
    }
    e.per = get_or(s, "per", e.per);
    if (e.source != "stars" && e.source != "external") throw InvalidArgument("exposure.source must be stars or external");
    if (!(e.half_life > 0.0)) throw InvalidArgument("exposure.half_life must be positive");
    cfg.exposure = e;
  }
  if (doc.contains("glm")) {
    const auto& s = section(doc, "glm");
    GlmConfig g;
    const auto fam = get_or<std::string>(s, "family", "negbin");
    if (fam == "negbin" || fam == "nb") g.family = CountFamily::NegBin;
    else if (fam == "poisson") g.family = CountFamily::Poisson;
    else throw InvalidArgument("glm.family must be negbin or poisson");
    g.alpha = get_number_or_auto(s, "alpha");
    g.alpha_grid = get_or(s, "alpha_grid", g.alpha_grid);
    g.formula.time_linear = get_or(s, "time_linear", true);
    g.formula.time_quadratic = get_or(s, "quadratic", true);
    g.formula.media = get_or(s, "media", false);
    g.formula.offset = get_or(s, "offset", true);
    g.epsilon = get_or(s, "epsilon", g.epsilon);
    g.slope_window = get_or(s, "slope_window", g.slope_window);
    if (g.alpha && !(*g.alpha > 0.0)) throw InvalidArgument("glm.alpha must be positive");
    cfg.glm = g;
  }
  if (doc.contains("regimes")) {
    const auto& s = section(doc, "regimes");
    RegimeConfig r;
    const auto& pelt = section(s, "pelt");
    r.penalty_grid = get_or(pelt, "grid", r.penalty_grid);
    r.min_segment = get_or<std::size_t>(pelt, "min_segment", r.min_segment);
    if (pelt.contains("penalty") && !pelt["penalty"].is_null()) {
      if (pelt["penalty"].is_number()) r.penalty = pelt["penalty"].get<double>();
      else if (pelt["penalty"].get<std::string>() != "plateau") r.penalty_level = parse_penalty_level(pelt["penalty"].get<std::string>());
    }
    if (r.penalty && !(*r.penalty > 0.0)) throw InvalidArgument("regimes.pelt.penalty must be positive");
    if (s.contains("hmm") && s["hmm"].is_boolean()) {
      r.hmm = s["hmm"].get<bool>();
    } else {
      const auto& h = section(s, "hmm");
      r.hmm_states = get_or(h, "states", r.hmm_states);
      r.hmm_restarts = get_or(h, "restarts", r.hmm_restarts);
    }
    if (s.contains("kmeans") && s["kmeans"].is_boolean()) {
      r.kmeans = s["kmeans"].get<bool>();
    } else {
      const auto& k = section(s, "kmeans");
      r.k_range = get_or(k, "k", r.k_range);
      r.trend_weight = get_or(k, "trend_weight", r.trend_weight);
      r.kmeans_restarts = get_or(k, "restarts", r.kmeans_restarts);
    }
    cfg.regimes = r;
  }
  if (doc.contains("phases")) {
    const auto& s = section(doc, "phases");
    PhaseConfig p;
    p.framework = parse_framework(get_or<std::string>(s, "framework", "three"));
    p.theta_low = get_number_or_auto(s, "theta_low");
    p.theta_high = get_number_or_auto(s, "theta_high");
    p.reference = get_window(s, "reference");
    p.spc_baseline = get_window(s, "spc_baseline");
    p.trend_cut = get_or(s, "trend_cut", p.trend_cut);
    p.rapid_cut = get_number_or_auto(s, "rapid_cut");
    p.segment_zero_rate = get_or(s, "segment_zero_rate", p.segment_zero_rate);
    if (p.theta_low && p.theta_high && !(*p.theta_low < *p.theta_high)) {
      throw InvalidArgument("phases.theta_low must be below phases.theta_high");
    }
    cfg.phases = p;
  }
  if (doc.contains("forecast")) {
    const auto& s = section(doc, "forecast");
    ForecastConfig f;
    f.horizon = get_or<std::size_t>(s, "horizon", f.horizon);
    if (s.contains("grid")) {
      f.grid.clear();
      for (const auto& o : s["grid"]) {
        const auto v = o.get<std::vector<int>>();
        if (v.size() != 3) throw InvalidArgument("forecast.grid entries need [p, d, q]");
        f.grid.push_back({v[0], v[1], v[2]});
      }
    }
    cfg.forecast = f;
  }
  if (doc.contains("impact")) {
    const auto& s = section(doc, "impact");
    ImpactConfig i;
    i.window = get_or(s, "window", i.window);
    i.wave_window = get_or(s, "wave_window", i.wave_window);
    i.method = parse_fdr_method(get_or<std::string>(s, "fdr", "bh"));
    if (i.window < 1 || i.wave_window < 1) throw InvalidArgument("impact windows must be at least one month");
    cfg.impact = i;
  }
  if (doc.contains("agreement")) {
    const auto& s = section(doc, "agreement");
    AgreementConfig a;
    a.max_lag = get_or(s, "max_lag", a.max_lag);
    cfg.agreement = a;
  }
  if (doc.contains("sweeps")) {
    const auto& s = section(doc, "sweeps");
    SweepConfig w;
    w.theta_low = get_or(s, "theta_low", w.theta_low);
    w.theta_high = get_or(s, "theta_high", w.theta_high);
    w.half_life = get_or(s, "half_life", w.half_life);
    w.alpha = get_or(s, "alpha", w.alpha);
    cfg.sweeps = w;
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  return parse_config(doc, std::filesystem::absolute(path).parent_path());
}

std::optional<MonthWindow> auto_reference_window(const Segmentation& seg, const RiskSeries& risk) {
  std::optional<std::size_t> best;
  double jump = 0.0;
  for (std::size_t k = 1; k < seg.segments.size(); ++k) {
    const double j = seg.segments[k].mean - seg.segments[k - 1].mean;
    if (j > jump) {
      jump = j;
      best = k;
    }
  }
  if (!best) return std::nullopt;
  const std::size_t end = seg.segments[*best].start;
  if (end == 0 || end > risk.size()) return std::nullopt;
  return MonthWindow{risk.months.front(), risk.months[end - 1]};
}

namespace {

std::vector<double> window_values(const RiskSeries& risk, const MonthWindow& w) {
  std::vector<double> out;
  for (std::size_t i = 0; i < risk.size(); ++i) {
    if (risk.months[i] >= w.first && risk.months[i] <= w.second) out.push_back(risk.z[i]);
  }
  return out;
}

}  // namespace

PhaseThresholds derive_thresholds(const PhaseConfig& cfg, const Segmentation& seg, const RiskSeries& risk,
                                  std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& w) {
    if (warnings) warnings->push_back(w);
  };
  PhaseThresholds th;
  th.trend_cut = cfg.trend_cut;
  th.segment_zero_rate = cfg.segment_zero_rate;
  const auto reference = cfg.reference ? cfg.reference : auto_reference_window(seg, risk);

  std::optional<std::pair<double, double>> calibrated;
  if (!cfg.theta_low || !cfg.theta_high) {
    if (reference) {
      try {
        calibrated = calibrate_thresholds(window_values(risk, *reference));
      } catch (const WindowTooShort& e) {
        warn(std::string("threshold calibration skipped: ") + e.what());
      }
    } else {
      warn("no reference window: no upward shift between segments");
    }
  }
  const PhaseThresholds defaults;
  th.theta_low = cfg.theta_low ? *cfg.theta_low : calibrated ? calibrated->first : defaults.theta_low;
  th.theta_high = cfg.theta_high ? *cfg.theta_high : calibrated ? calibrated->second : defaults.theta_high;
  if (!calibrated && (!cfg.theta_low || !cfg.theta_high)) warn("using default thresholds for uncalibrated values");
  if (!(th.theta_low < th.theta_high)) throw InvalidArgument("derived theta_low is not below theta_high");

  const auto baseline = cfg.spc_baseline ? cfg.spc_baseline : reference;
  if (baseline) {
    try {
      const auto [m, sd] = spc_baseline(window_values(risk, *baseline));
      th.spc_mean = m;
      th.spc_sd = sd;
    } catch (const Error& e) {
      warn(std::string("SPC baseline fell back to the whole series: ") + e.what());
      th.spc_mean = stats::mean(risk.z);
      th.spc_sd = stats::population_sd(risk.z);
    }
  } else {
    th.spc_mean = stats::mean(risk.z);
    th.spc_sd = stats::population_sd(risk.z);
  }
  if (cfg.rapid_cut) {
    th.rapid_cut = *cfg.rapid_cut;
  } else {
    std::vector<double> slopes;
    for (const auto& s : seg.segments) slopes.push_back(s.within_slope);
    th.rapid_cut = rapid_cut(slopes);
  }
  th.validate();
  return th;
}

namespace {

std::filesystem::path resolve(const PipelineConfig& cfg, const std::filesystem::path& p) {
  return p.is_absolute() ? p : cfg.base_dir / p;
}

std::ifstream open_input(const PipelineConfig& cfg, const std::optional<std::filesystem::path>& p, const char* what) {
  if (!p) throw InvalidArgument(std::string("config has no ") + what + " input");
  const auto full = resolve(cfg, *p);
  std::ifstream in(full);
  if (!in) throw InvalidArgument(std::string("cannot open ") + what + " input " + full.string());
  return in;
}

json input_digests(const PipelineConfig& cfg) {
  json out = json::object();
  const std::pair<const char*, const std::optional<std::filesystem::path>*> items[] = {
      {"incidents", &cfg.inputs.incidents}, {"exposure", &cfg.inputs.exposure},
      {"media", &cfg.inputs.media},         {"stars", &cfg.inputs.stars},
      {"interventions", &cfg.inputs.interventions}, {"second_source", &cfg.inputs.second_source}};
  for (const auto& [name, path] : items) {
    if (!*path) continue;
    const auto full = resolve(cfg, **path);
    std::string digest = "missing";
    if (std::filesystem::exists(full)) digest = sha256_file(full);
    out[name] = {{"path", (*path)->string()}, {"sha256", digest}};
  }
  return out;
}

json canonical_config(const PipelineConfig& cfg) {
  json doc = cfg.source;
  doc["seed"] = cfg.seed;
  json digests = json::object();
  const json inputs = input_digests(cfg);
  for (const auto& [name, v] : inputs.items()) digests[name] = v["sha256"];
  doc["inputs"] = digests;
  return doc;
}

std::mutex& run_lock(const std::string& run_id) {
  static std::mutex guard;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard g(guard);
  auto& slot = locks[run_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

class RunWriter {
 public:
  RunWriter(std::filesystem::path dir, json manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {
    manifest_["artifacts"] = json::object();
    manifest_["stages"] = json::array();
  }

  void put(const std::string& name, const json& value) {
    const std::string file = name + ".json";
    const std::string text = value.dump(1) + "\n";
    std::ofstream out(dir_ / file, std::ios::binary);
    if (!out) throw Error("cannot write artifact " + file);
    out << text;
    manifest_["artifacts"][name] = {{"file", file}, {"sha256", sha256_hex(text)}};
  }

  void stage_done(const std::string& stage) { manifest_["stages"].push_back(stage); }

  json seal(const std::string& status, const std::string& failed_stage = {}, const std::string& error = {}) {
    std::string concat;
    for (const auto& [name, a] : manifest_["artifacts"].items()) concat += name + " " + a["sha256"].get<std::string>() + "\n";
    manifest_["run_digest"] = sha256_hex(concat);
    manifest_["status"] = status;
    if (!failed_stage.empty()) {
      manifest_["failed_stage"] = failed_stage;
      manifest_["error"] = error;
    }
    write_json_file(dir_ / "manifest.json", manifest_);
    return manifest_;
  }

 private:
  std::filesystem::path dir_;
  json manifest_;
};

std::vector<int> segment_index_labels(const Segmentation& seg) {
  std::vector<int> out;
  for (std::size_t k = 0; k < seg.segments.size(); ++k) out.insert(out.end(), seg.segments[k].n_months(), static_cast<int>(k));
  return out;
}

json pair_agreement(std::span<const int> a, std::span<const int> b) {
  const auto p = partition_agreement(a, b);
  return {{"ari", number(p.ari)}, {"nmi", number(p.nmi)}, {"aligned_accuracy", number(aligned_accuracy(a, b))}};
}

}  // namespace

std::string compute_run_id(const PipelineConfig& cfg) {
  return sha256_hex(canonical_dump(canonical_config(cfg))).substr(0, 16);
}

RunResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_root) {
  RunResult result;
  result.run_id = compute_run_id(cfg);
  result.dir = out_root / result.run_id;
  std::lock_guard lock(run_lock(result.run_id));
  if (std::filesystem::exists(result.dir / "manifest.json")) {
    auto existing = read_json_file(result.dir / "manifest.json");
    if (existing.value("status", "") == "sealed") {
      result.manifest = std::move(existing);
      return result;
    }
  }
  std::filesystem::remove_all(result.dir);
  std::filesystem::create_directories(result.dir);

  json manifest = {{"run_id", result.run_id},
                   {"domain", cfg.domain},
                   {"created_at", utc_timestamp()},
                   {"config", cfg.source},
                   {"inputs", input_digests(cfg)},
                   {"seeds", {{"config", cfg.seed}, {"hmm", cfg.seed}, {"kmeans", cfg.seed}}}};
  RunWriter writer(result.dir, manifest);

  std::string stage;
  try {
    // ingest
    stage = "ingest";
    IncidentCorpus corpus;
    {
      auto in = open_input(cfg, cfg.inputs.incidents, "incidents");
      corpus = load_incidents(in);
    }
    const SeverityScale scale = cfg.ingest.severity_weights.empty() ? SeverityScale{} : SeverityScale{cfg.ingest.severity_weights};
    MonthlyPanel panel = aggregate_monthly(corpus.records, cfg.ingest.filter, cfg.ingest.basis, scale);
    std::vector<std::string> panel_warnings = corpus.warnings;
    if (cfg.inputs.media) {
      auto in = open_input(cfg, cfg.inputs.media, "media");
      attach_media(panel, load_media_csv(in));
    }
    json rejects = json::array();
    for (const auto& r : corpus.rejects) rejects.push_back({{"line", r.line}, {"reason", r.reason}});
    json groups = json::object();
    if (!cfg.ingest.groups.empty()) {
      for (const auto& [name, gp] : group_decompose(corpus.records, cfg.ingest.groups, cfg.ingest.filter, cfg.ingest.basis)) {
        groups[name] = gp.raw_count;
      }
    }
    writer.put("panel", {{"panel", panel},
                         {"n_records", corpus.records.size()},
                         {"count_basis", std::string(to_string(cfg.ingest.basis))},
                         {"rejects", rejects},
                         {"warnings", panel_warnings},
                         {"groups", groups}});
    writer.stage_done(stage);

    // delay
    std::optional<NowcastAdjustment> nowcast;
    if (cfg.delay) {
      stage = "delay";
      const auto lags = compute_lags(corpus.records);
      const auto selection = select_delay_model(lags.days, cfg.delay->fit);
      const auto months = lags_to_months(lags.days);
      nowcast = build_nowcast(months, cfg.delay->percentile, cfg.delay->cap);
      const MonthIndex as_of = cfg.delay->as_of ? month_of(*cfg.delay->as_of) : panel.months.back();
      panel = apply_nowcast(panel, *nowcast, as_of);
      writer.put("delay", {{"n_valid", lags.days.size()},
                           {"n_excluded", lags.excluded},
                           {"excluded_fraction", lags.excluded_fraction()},
                           {"selection", selection},
                           {"nowcast", *nowcast},
                           {"as_of", as_of}});
      writer.stage_done(stage);
    }

    // exposure
    MonthlyPanel pre_exposure = panel;
    std::vector<StarEvent> stars;
    if (cfg.exposure) {
      stage = "exposure";
      ExposureMerge merged;
      json index_json;
      if (cfg.exposure->source == "stars") {
        auto in = open_input(cfg, cfg.inputs.stars, "stars");
        stars = load_star_events(in);
        auto index = depreciated_installed_base(stars, cfg.exposure->half_life, panel.months.front(), panel.months.back());
        if (cfg.exposure->scale) index = scale_range(index, cfg.exposure->scale_lo, cfg.exposure->scale_hi);
        merged = merge_external(panel, index);
        index_json = index;
      } else {
        auto in = open_input(cfg, cfg.inputs.exposure, "exposure");
        const auto values = load_exposure_csv(in);
        merged = merge_external(panel, values);
        json v = json::array();
        for (const auto& mv : values) v.push_back({{"month", mv.month}, {"value", mv.value}});
        index_json = {{"source", "external"}, {"values", v}};
      }
      panel = merged.panel;
      json rate = nullptr;
      try {
        rate = exposure_adjusted_rate(panel, cfg.exposure->per);
      } catch (const Error& e) {
        rate = {{"error", e.what()}};
      }
      writer.put("exposure", {{"index", index_json}, {"uncovered", merged.uncovered}, {"covered", merged.covered}, {"rate", rate}});
      writer.stage_done(stage);
    }

    if (!cfg.glm) {
      result.manifest = writer.seal("sealed");
      return result;
    }

    // glm
    stage = "glm";
    GlmConfig gcfg = *cfg.glm;
    std::vector<std::string> glm_warnings;
    if (gcfg.formula.offset && !panel.has_exposure()) {
      gcfg.formula.offset = false;
      glm_warnings.push_back("no exposure: offset dropped");
    }
    if (gcfg.formula.media && !panel.has_media()) {
      gcfg.formula.media = false;
      glm_warnings.push_back("no media input: media term dropped");
    }
    json alpha_search = nullptr;
    double alpha = gcfg.alpha.value_or(1.0);
    if (gcfg.family == CountFamily::NegBin && !gcfg.alpha) {
      const auto search = alpha_grid_search(panel, gcfg.formula, gcfg.alpha_grid);
      alpha = search.best_alpha;
      alpha_search = search;
    }
    const auto fit = fit_count_model(panel, gcfg.formula, gcfg.family, gcfg.family == CountFamily::NegBin ? alpha : 0.0);
    json lr = nullptr;
    json poisson_json = nullptr;
    if (gcfg.family == CountFamily::NegBin) {
      const auto pois = fit_count_model(panel, gcfg.formula, CountFamily::Poisson);
      lr = likelihood_ratio_poisson_vs_nb(pois, fit);
      poisson_json = {{"loglik", number(pois.loglik)}, {"pearson_dispersion", number(pois.pearson_dispersion)},
                      {"dispersion", dispersion_diagnostics(pois)}};
    }
    const auto excess = excess_risk(panel, fit, gcfg.epsilon, gcfg.slope_window);
    writer.put("model_panel", panel);
    writer.put("glm", {{"formula",
                        {{"time_linear", gcfg.formula.time_linear},
                         {"time_quadratic", gcfg.formula.time_quadratic},
                         {"media", gcfg.formula.media},
                         {"offset", gcfg.formula.offset}}},
                       {"fit", fit},
                       {"dispersion", dispersion_diagnostics(fit)},
                       {"alpha_search", alpha_search},
                       {"poisson", poisson_json},
                       {"likelihood_ratio", lr},
                       {"warnings", glm_warnings}});
    writer.put("risk", excess);
    writer.stage_done(stage);
    if (!excess.standardized) throw ConstantInput("excess risk is constant; nothing to segment");
    const RiskSeries& risk = *excess.standardized;
    std::vector<double> month_counts;
    for (const auto& m : risk.months) month_counts.push_back(static_cast<double>(panel.raw_count[*panel.position(m)]));

    if (!cfg.regimes) {
      result.manifest = writer.seal("sealed");
      return result;
    }

    // regimes
    stage = "regimes";
    const auto& rc = *cfg.regimes;
    const auto sweep = penalty_sweep(risk.z, rc.penalty_grid, rc.min_segment);
    double penalty = 0.0;
    std::string penalty_rule;
    if (rc.penalty) {
      penalty = *rc.penalty;
      penalty_rule = "fixed";
    } else if (rc.penalty_level) {
      penalty = penalty_formula(*rc.penalty_level, risk.size(), stats::population_variance(risk.z));
      penalty_rule = std::string(to_string(*rc.penalty_level));
    } else {
      penalty = select_by_plateau(sweep);
      penalty_rule = "plateau";
    }
    const Segmentation seg = segment_stats(risk.z, pelt_detect(risk.z, penalty, rc.min_segment), month_counts);
    json levels = json::object();
    for (auto lvl : {PenaltyLevel::Conservative, PenaltyLevel::Moderate, PenaltyLevel::Sensitive, PenaltyLevel::Exploratory}) {
      const double pen = penalty_formula(lvl, risk.size(), stats::population_variance(risk.z));
      const auto s = pelt_detect(risk.z, pen, rc.min_segment);
      levels[std::string(to_string(lvl))] = {{"penalty", pen}, {"n_segments", s.segments.size()}, {"changepoints", s.changepoints}};
    }
    const auto brk = main_break(seg);
    writer.put("pelt", {{"sweep", sweep},
                        {"widest_plateau", widest_plateau(sweep)},
                        {"penalty", penalty},
                        {"penalty_rule", penalty_rule},
                        {"segmentation", seg},
                        {"main_break", brk ? json(risk.months[*brk]) : json(nullptr)},
                        {"penalty_levels", levels}});

    json triangulation = json::object();
    const auto pelt_labels = segment_index_labels(seg);
    std::optional<HmmFit> hmm_best;
    if (rc.hmm) {
      const auto sel = hmm_select(risk.z, rc.hmm_states, rc.hmm_restarts, cfg.seed);
      HmmOptions opt;
      opt.restarts = rc.hmm_restarts;
      hmm_best = hmm_fit(risk.z, sel.best_states, cfg.seed, opt);
      writer.put("hmm", {{"selection", sel}, {"best", *hmm_best}});
    }
    std::optional<ClusterFit> km_best;
    if (rc.kmeans) {
      const auto sel = kmeans_select(risk, rc.k_range, rc.trend_weight, cfg.seed, rc.kmeans_restarts);
      km_best = kmeans_fit(risk, sel.best_k, rc.trend_weight, cfg.seed, rc.kmeans_restarts);
      writer.put("kmeans", {{"selection", sel}, {"best", *km_best}, {"macro_bands", macro_bands(*km_best)}});
    }
    if (hmm_best) triangulation["pelt_vs_hmm"] = pair_agreement(pelt_labels, hmm_best->decoded);
    if (km_best) triangulation["pelt_vs_kmeans"] = pair_agreement(pelt_labels, km_best->labels);
    if (hmm_best && km_best) triangulation["hmm_vs_kmeans"] = pair_agreement(hmm_best->decoded, km_best->labels);
    if (!triangulation.empty()) writer.put("triangulation", triangulation);
    writer.stage_done(stage);

    if (!cfg.phases) {
      result.manifest = writer.seal("sealed");
      return result;
    }

    // phases
    stage = "phases";
    std::vector<std::string> phase_warnings;
    const auto th = derive_thresholds(*cfg.phases, seg, risk, &phase_warnings);
    const auto reference = cfg.phases->reference ? cfg.phases->reference : auto_reference_window(seg, risk);
    const auto tl = timeline(panel, risk, th);
    json tl_json = tl;
    tl_json["framework"] = std::string(to_string(cfg.phases->framework));
    tl_json["reference_window"] =
        reference ? json{{"from", reference->first}, {"to", reference->second}} : json(nullptr);
    tl_json["warnings"] = phase_warnings;
    writer.put("timeline", tl_json);
    writer.put("segment_phases", {{"three", classify_segments(seg, th, PhaseFramework::Three)},
                                  {"six", classify_segments(seg, th, PhaseFramework::Six)}});
    writer.stage_done(stage);

    // forecast
    if (cfg.forecast) {
      stage = "forecast";
      json adf = json::object();
      try {
        adf["level"] = adf_test(risk.z);
        std::vector<double> diff;
        for (std::size_t i = 1; i < risk.size(); ++i) diff.push_back(risk.z[i] - risk.z[i - 1]);
        adf["differenced"] = adf_test(diff);
      } catch (const Error& e) {
        adf["error"] = e.what();
      }
      const auto sel = arima_select(risk.z, cfg.forecast->grid);
      const auto band = forecast(sel.best, cfg.forecast->horizon, th, {0.0, 1.0}, risk.months.back());
      writer.put("forecast", {{"adf", adf}, {"selection", sel}, {"band", band}});
      writer.stage_done(stage);
    }

    // impact
    if (cfg.impact) {
      stage = "impact";
      auto in = open_input(cfg, cfg.inputs.interventions, "interventions");
      const auto events = load_interventions(in, cfg.impact->window);
      const auto fam = impact_family(risk, events, cfg.impact->method);
      const auto waves = wave_impact(risk, group_waves(events), cfg.impact->wave_window, cfg.impact->method);
      writer.put("impact", {{"events", fam}, {"waves", waves}, {"expected_vs_actual", expected_vs_actual(events, fam.results)}});
      writer.stage_done(stage);
    }

    // agreement
    if (cfg.agreement) {
      stage = "agreement";
      auto in = open_input(cfg, cfg.inputs.second_source, "second_source");
      const auto second = load_count_series(in);
      std::vector<MonthIndex> sm;
      std::vector<double> sv;
      for (const auto& mv : second) {
        sm.push_back(mv.month);
        sv.push_back(mv.value);
      }
      std::vector<double> primary;
      for (const auto& m : risk.months) primary.push_back(panel.nowcast_count[*panel.position(m)]);
      const auto aligned = align_months(risk.months, primary, sm, sv);
      if (aligned.months.size() < 3) throw NoOverlap("second source overlaps fewer than three months");
      const auto second_std = standardize(aligned.b);
      const auto second_slope = rolling_slope(second_std.z, gcfg.slope_window);
      std::vector<int> six_primary, six_second, three_primary, three_second;
      for (std::size_t i = 0; i < aligned.months.size(); ++i) {
        const auto pos = *risk.position(aligned.months[i]);
        six_primary.push_back(static_cast<int>(tl.six_phase[pos]));
        three_primary.push_back(static_cast<int>(tl.three_phase[pos]));
        const MonthObservation obs{aligned.b[i], second_std.z[i], second_slope[i]};
        six_second.push_back(static_cast<int>(classify_six(obs, th)));
        three_second.push_back(static_cast<int>(classify_three(obs, th)));
      }
      const int none = static_cast<int>(SixPhase::NoEvidencedOccurrence);
      writer.put("agreement",
                 {{"months", aligned.months},
                  {"pearson_r", number(pearson(aligned.a, aligned.b))},
                  {"ccf", lagged_ccf(aligned.a, aligned.b, cfg.agreement->max_lag)},
                  {"scaled_primary", json(minmax_scale(aligned.a))},
                  {"scaled_second", json(minmax_scale(aligned.b))},
                  {"six_phase", phase_agreement(six_primary, six_second, kSixPhaseCount)},
                  {"six_phase_excluding_no_evidence", phase_agreement(six_primary, six_second, kSixPhaseCount, none)},
                  {"three_phase", phase_agreement(three_primary, three_second, kThreePhaseCount)}});
      writer.stage_done(stage);
    }

    // sweeps
    if (cfg.sweeps) {
      stage = "sweeps";
      const auto& sw = *cfg.sweeps;
      if (!sw.theta_low.empty()) {
        writer.put("sweep_theta_low", threshold_sweep(seg, th, sw.theta_low, cfg.phases->framework));
      }
      if (!sw.theta_low.empty() && !sw.theta_high.empty()) {
        writer.put("sweep_thresholds", two_threshold_sweep(month_counts, risk, th, sw.theta_low, sw.theta_high));
      }
      BreakSettings bs;
      bs.formula = gcfg.formula;
      bs.family = gcfg.family;
      bs.alpha = alpha;
      bs.epsilon = gcfg.epsilon;
      bs.slope_window = gcfg.slope_window;
      bs.penalty_grid = rc.penalty_grid;
      if (rc.penalty) bs.fixed_penalty = rc.penalty;
      if (cfg.exposure) bs.scale_exposure = cfg.exposure->scale;
      if (!sw.half_life.empty() && !stars.empty()) {
        writer.put("sweep_half_life", halflife_sweep(stars, pre_exposure, sw.half_life, bs));
      }
      if (!sw.alpha.empty()) writer.put("sweep_alpha", dispersion_sweep(panel, sw.alpha, bs));
      writer.stage_done(stage);
    }
  } catch (const std::exception& e) {
    result.manifest = writer.seal("failed", stage, e.what());
    throw StageError(stage, e.what());
  }
  result.manifest = writer.seal("sealed");
  return result;
}

}  // namespace riskphase
