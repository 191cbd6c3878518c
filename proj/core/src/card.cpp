#include "riskphase/card.hpp"

#include <iomanip>
#include <sstream>

#include "riskphase/errors.hpp"

namespace riskphase {

namespace {

json last_transitions(const json& months, const json& labels, std::size_t keep) {
  json out = json::array();
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[i - 1]) out.push_back({{"month", months[i]}, {"from", labels[i - 1]}, {"to", labels[i]}});
  }
  if (out.size() > keep) out.erase(out.begin(), out.end() - static_cast<std::ptrdiff_t>(keep));
  return out;
}

json framework_block(const json& months, const json& block) {
  return {{"current", block["labels"].back()},
          {"distribution", block["distribution"]},
          {"last_transitions", last_transitions(months, block["labels"], 3)}};
}

}  // namespace

json emit_card(const RunStore& store, const std::string& run_id) {
  const auto manifest = store.manifest(run_id);
  if (manifest.value("status", "") != "sealed") throw InvalidArgument("run " + run_id + " is not sealed");
  const auto tl = store.artifact(run_id, "timeline");
  const auto risk = store.artifact(run_id, "risk");

  json card;
  card["run_id"] = run_id;
  card["domain"] = manifest.value("domain", "");
  card["as_of"] = tl["months"].back();
  card["framework"] = tl.value("framework", "three");
  card["six_phase"] = framework_block(tl["months"], tl["six"]);
  card["three_phase"] = framework_block(tl["months"], tl["three"]);
  card["thresholds"] = tl["thresholds"];
  const auto& rs = risk["standardized"];
  card["risk"] = {{"level", rs["z"].back()}, {"trend", rs["slope"].back()}};

  if (store.has_artifact(run_id, "forecast")) {
    const auto fc = store.artifact(run_id, "forecast");
    const auto& band = fc["band"];
    card["forecast"] = {{"order", fc["selection"]["best"]["order"]},
                        {"aic", fc["selection"]["best"]["aic"]},
                        {"horizon", band["months"].size()},
                        {"first", {{"month", band["months"].front()},
                                   {"point", band["point"].front()},
                                   {"lower95", band["lower95"].front()},
                                   {"upper95", band["upper95"].front()},
                                   {"projected_phase", band["projected_phase"].front()}}},
                        {"last", {{"month", band["months"].back()},
                                  {"point", band["point"].back()},
                                  {"lower95", band["lower95"].back()},
                                  {"upper95", band["upper95"].back()},
                                  {"projected_phase", band["projected_phase"].back()}}},
                        {"negative_lower", band["negative_lower"]}};
  } else {
    card["forecast"] = nullptr;
  }
  card["triangulation"] = store.has_artifact(run_id, "triangulation") ? store.artifact(run_id, "triangulation") : json(nullptr);
  if (store.has_artifact(run_id, "agreement")) {
    const auto ag = store.artifact(run_id, "agreement");
    card["agreement"] = {{"pearson_r", ag["pearson_r"]},
                         {"best_lag", ag["ccf"]["best_lag"]},
                         {"best_r", ag["ccf"]["best_r"]},
                         {"kappa_six", ag["six_phase"]["kappa"]},
                         {"kappa_three", ag["three_phase"]["kappa"]}};
  } else {
    card["agreement"] = nullptr;
  }

  json quality = json::object();
  if (store.has_artifact(run_id, "delay")) {
    const auto d = store.artifact(run_id, "delay");
    quality["nowcast_window_months"] = d["nowcast"]["window_months"];
    quality["delay_family"] = d["selection"]["best"]["family"];
    quality["delay_degenerate"] = d["selection"]["best"]["degenerate"];
    quality["delay_warnings"] = d["selection"]["best"]["warnings"];
  }
  if (store.has_artifact(run_id, "exposure")) {
    quality["exposure_uncovered_months"] = store.artifact(run_id, "exposure")["uncovered"];
  }
  quality["excess_degenerate"] = risk["degenerate"];
  if (store.has_artifact(run_id, "hmm")) quality["hmm_degenerate"] = store.artifact(run_id, "hmm")["best"]["degenerate"];
  quality["ingest_rejects"] = store.artifact(run_id, "panel")["rejects"].size();
  quality["phase_warnings"] = tl.value("warnings", json::array());
  card["data_quality"] = quality;
  card["declarations"] = store.declarations(run_id);
  return card;
}

std::string render_card_text(const json& card) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  const auto num = [](const json& v) -> std::string {
    if (v.is_null()) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v.get<double>();
    return s.str();
  };
  os << "Risk card: " << card["domain"].get<std::string>() << " (run " << card["run_id"].get<std::string>() << ")\n";
  os << "As of " << card["as_of"].get<std::string>() << "\n\n";
  os << "Current phase (three-phase): " << card["three_phase"]["current"].get<std::string>() << "\n";
  os << "Current phase (six-phase):   " << card["six_phase"]["current"].get<std::string>() << "\n";
  os << "Risk level " << num(card["risk"]["level"]) << " sd, trend " << num(card["risk"]["trend"]) << " sd/month\n";
  os << "Thresholds: theta_low " << num(card["thresholds"]["theta_low"]) << ", theta_high "
     << num(card["thresholds"]["theta_high"]) << ", epidemic " << num(card["thresholds"]["spc_epidemic"]) << "\n\n";
  for (const char* fw : {"three_phase", "six_phase"}) {
    os << (std::string(fw) == "three_phase" ? "Three-phase" : "Six-phase") << " distribution:\n";
    for (const auto& d : card[fw]["distribution"]) {
      if (d["months"].get<int>() == 0) continue;
      os << "  " << std::left << std::setw(26) << d["phase"].get<std::string>() << std::right << std::setw(4)
         << d["months"].get<int>() << " months  " << std::setw(6) << num(d["percent"]) << "%\n";
    }
    os << "  recent transitions:";
    if (card[fw]["last_transitions"].empty()) os << " none";
    os << "\n";
    for (const auto& t : card[fw]["last_transitions"]) {
      os << "    " << t["month"].get<std::string>() << "  " << t["from"].get<std::string>() << " -> "
         << t["to"].get<std::string>() << "\n";
    }
  }
  if (!card["forecast"].is_null()) {
    const auto& f = card["forecast"];
    os << "\nForecast ARIMA" << f["order"].get<std::string>() << ", AIC " << num(f["aic"]) << ", "
       << f["horizon"].get<int>() << " months\n";
    for (const char* key : {"first", "last"}) {
      const auto& p = f[key];
      os << "  " << p["month"].get<std::string>() << "  " << num(p["point"]) << " [" << num(p["lower95"]) << ", "
         << num(p["upper95"]) << "]  " << p["projected_phase"].get<std::string>() << "\n";
    }
  }
  if (!card["triangulation"].is_null()) {
    os << "\nTriangulation:\n";
    for (const auto& [pair, v] : card["triangulation"].items()) {
      os << "  " << std::left << std::setw(16) << pair << std::right << " ARI " << num(v["ari"]) << "  NMI "
         << num(v["nmi"]) << "\n";
    }
  }
  if (!card["agreement"].is_null()) {
    const auto& a = card["agreement"];
    os << "\nSecond source: r " << num(a["pearson_r"]) << ", best lag " << a["best_lag"].get<int>() << " (r "
       << num(a["best_r"]) << "), kappa six " << num(a["kappa_six"]) << ", kappa three " << num(a["kappa_three"]) << "\n";
  }
  os << "\nData quality:\n";
  for (const auto& [k, v] : card["data_quality"].items()) os << "  " << k << ": " << v.dump() << "\n";
  os << "\nDeclarations: " << card["declarations"].size() << "\n";
  for (const auto& d : card["declarations"]) {
    os << "  " << d["timestamp"].get<std::string>() << "  " << d["analyst"].get<std::string>() << "  "
       << d["phase"].get<std::string>() << "  \"" << d["rationale"].get<std::string>() << "\"\n";
  }
  return os.str();
}

}  // namespace riskphase
