#include "riskphase/service.hpp"

#include <cmath>
#include <regex>

#include "httplib.h"
#include "riskphase/card.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/pipeline.hpp"

namespace riskphase {

struct Service::Impl {
  httplib::Server server;
};

namespace {

HttpResponse reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }
HttpResponse error_reply(int status, const std::string& message) { return reply(status, {{"error", message}}); }

double parse_param(const std::map<std::string, std::string>& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end()) throw InvalidArgument("missing query parameter '" + key + "'");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("query parameter '" + key + "' is not a number");
  }
  if (used != it->second.size() || !std::isfinite(v)) throw InvalidArgument("query parameter '" + key + "' is not a finite number");
  return v;
}

bool inside(const InvariantZone& z, double v) {
  const bool above = z.lo_open ? v > z.lo : v >= z.lo;
  const bool below = z.hi_open ? v < z.hi : v <= z.hi;
  return above && below;
}

json classify_response(const RunStore& store, const std::string& id, const std::map<std::string, std::string>& q) {
  const auto tl = store.artifact(id, "timeline");
  PhaseThresholds th = tl["thresholds"].get<PhaseThresholds>();
  if (q.count("theta_low")) th.theta_low = parse_param(q, "theta_low");
  if (q.count("theta_high")) th.theta_high = parse_param(q, "theta_high");
  if (!(th.theta_low < th.theta_high)) throw InvalidArgument("theta_low must be below theta_high");
  const auto fw_it = q.find("framework");
  const PhaseFramework fw = parse_framework(fw_it != q.end() ? fw_it->second : tl.value("framework", "three"));

  const auto risk = store.artifact(id, "risk")["standardized"].get<RiskSeries>();
  const auto panel = store.artifact(id, "model_panel").get<MonthlyPanel>();
  const auto seg = store.artifact(id, "pelt")["segmentation"].get<Segmentation>();
  const auto result = timeline(panel, risk, th);
  json full = result;
  const char* key = fw == PhaseFramework::Six ? "six" : "three";
  json out = {{"run_id", id},
              {"parameters", {{"theta_low", th.theta_low}, {"theta_high", th.theta_high}, {"framework", to_string(fw)}}},
              {"months", full["months"]},
              {"labels", full[key]["labels"]},
              {"distribution", full[key]["distribution"]},
              {"transition_matrix", full[key]["transition_matrix"]},
              {"segments", classify_segments(seg, th, fw)}};
  out["invariant_zone"] = nullptr;
  out["in_invariant_zone"] = nullptr;
  if (store.has_artifact(id, "sweep_theta_low")) {
    const auto zones = store.artifact(id, "sweep_theta_low")["invariant_zones"].get<std::vector<InvariantZone>>();
    out["in_invariant_zone"] = false;
    for (const auto& z : zones) {
      if (inside(z, th.theta_low)) {
        out["invariant_zone"] = z;
        out["in_invariant_zone"] = true;
        break;
      }
    }
  }
  return out;
}

json segments_response(const RunStore& store, const std::string& id, const std::map<std::string, std::string>& q) {
  const double penalty = parse_param(q, "penalty");
  if (!(penalty > 0.0)) throw InvalidArgument("penalty must be positive");
  const auto pelt = store.artifact(id, "pelt");
  const auto risk = store.artifact(id, "risk")["standardized"].get<RiskSeries>();
  const auto panel = store.artifact(id, "model_panel").get<MonthlyPanel>();
  std::vector<double> counts;
  for (const auto& m : risk.months) counts.push_back(static_cast<double>(panel.raw_count[*panel.position(m)]));
  const auto seg = segment_stats(risk.z, pelt_detect(risk.z, penalty), counts);
  json cps = json::array();
  for (auto c : seg.changepoints) cps.push_back(risk.months[c]);
  return {{"run_id", id},
          {"parameters", {{"penalty", penalty}}},
          {"segmentation", seg},
          {"changepoint_months", cps},
          {"plateaus", pelt["sweep"]["plateaus"]}};
}

}  // namespace

Service::Service(std::filesystem::path runs_root, std::filesystem::path config_base)
    : store_(std::move(runs_root)), config_base_(std::move(config_base)), impl_(std::make_shared<Impl>()) {}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query, const std::string& body) {
  static const std::regex runs_re(R"(^/runs/?$)");
  static const std::regex run_re(R"(^/runs/([^/]+)/?$)");
  static const std::regex artifact_re(R"(^/runs/([^/]+)/artifacts/([A-Za-z0-9_\-]+)$)");
  static const std::regex sub_re(R"(^/runs/([^/]+)/(classify|segments|declarations|card)$)");
  static const std::regex sweep_re(R"(^/runs/([^/]+)/sweeps/([A-Za-z0-9_\-]+)$)");
  std::smatch m;
  try {
    if (std::regex_match(path, runs_re)) {
      if (method == "GET") return reply(200, {{"runs", store_.list_runs()}});
      if (method != "POST") return error_reply(405, "method not allowed");
      json doc;
      try {
        doc = json::parse(body);
      } catch (const json::parse_error& e) {
        return error_reply(422, std::string("config is not valid JSON: ") + e.what());
      }
      const auto cfg = parse_config(doc, config_base_);
      try {
        const auto run = run_pipeline(cfg, store_.root());
        return reply(201, {{"run_id", run.run_id}, {"status", run.manifest["status"]}});
      } catch (const StageError& e) {
        return reply(422, {{"error", e.what()}, {"stage", e.stage()}, {"run_id", compute_run_id(cfg)}});
      }
    }
    if (std::regex_match(path, m, artifact_re)) {
      const std::string id = m[1], name = m[2];
      if (method == "PUT" || method == "DELETE" || method == "POST" || method == "PATCH") {
        store_.manifest(id);
        return error_reply(409, "run " + id + " is sealed; artifacts are immutable");
      }
      if (method != "GET") return error_reply(405, "method not allowed");
      return reply(200, store_.artifact(id, name));
    }
    if (std::regex_match(path, m, sweep_re)) {
      if (method != "GET") return error_reply(405, "method not allowed");
      const std::string id = m[1], axis = m[2];
      if (axis == "thresholds") return reply(200, store_.artifact(id, "sweep_thresholds"));
      return reply(200, store_.artifact(id, "sweep_" + axis));
    }
    if (std::regex_match(path, m, sub_re)) {
      const std::string id = m[1], what = m[2];
      store_.manifest(id);
      if (what == "declarations") {
        if (method == "GET") return reply(200, {{"declarations", store_.declarations(id)}});
        if (method != "POST") return error_reply(405, "method not allowed");
        json doc;
        try {
          doc = json::parse(body);
        } catch (const json::parse_error& e) {
          return error_reply(422, std::string("declaration is not valid JSON: ") + e.what());
        }
        return reply(201, store_.append_declaration(id, declaration_from_json(doc)));
      }
      if (method != "GET") return error_reply(405, "method not allowed");
      if (what == "classify") return reply(200, classify_response(store_, id, query));
      if (what == "segments") return reply(200, segments_response(store_, id, query));
      const auto card = emit_card(store_, id);
      const auto fmt = query.find("format");
      if (fmt != query.end() && fmt->second == "text") return {200, render_card_text(card), "text/plain"};
      return reply(200, card);
    }
    if (std::regex_match(path, m, run_re)) {
      const std::string id = m[1];
      if (method == "PUT" || method == "DELETE" || method == "POST" || method == "PATCH") {
        store_.manifest(id);
        return error_reply(409, "run " + id + " is sealed");
      }
      if (method != "GET") return error_reply(405, "method not allowed");
      return reply(200, store_.manifest(id));
    }
    return error_reply(404, "no route for " + path);
  } catch (const RunNotFound& e) {
    return error_reply(404, e.what());
  } catch (const ArtifactNotFound& e) {
    return error_reply(404, e.what());
  } catch (const SealedRun& e) {
    return error_reply(409, e.what());
  } catch (const Error& e) {
    return error_reply(422, e.what());
  } catch (const json::exception& e) {
    return error_reply(422, e.what());
  }
}

namespace {

void install_routes(httplib::Server& server, Service& svc) {
  auto bridge = [&svc](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> q;
    for (const auto& [k, v] : req.params) q[k] = v;
    const auto r = svc.handle(req.method, req.path, q, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const std::string any = R"(/.*)";
  server.Get(any, bridge);
  server.Post(any, bridge);
  server.Put(any, bridge);
  server.Delete(any, bridge);
  server.Patch(any, bridge);
}

}  // namespace

bool Service::serve(const std::string& host, int port) {
  install_routes(impl_->server, *this);
  return impl_->server.listen(host, port);
}

int Service::bind_any(const std::string& host) {
  install_routes(impl_->server, *this);
  return impl_->server.bind_to_any_port(host);
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace riskphase
