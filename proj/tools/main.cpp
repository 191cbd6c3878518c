// riskphase command line: every verb runs the configured pipeline up to the
// stage it needs and prints that stage's artifact as JSON.
#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "riskphase/card.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/pipeline.hpp"
#include "riskphase/service.hpp"
#include "riskphase/synthetic.hpp"

using riskphase::json;

namespace {

struct Globals {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

// Sections each verb keeps; later ones are dropped from the document.
const std::vector<std::string> kOrder{"delay", "exposure", "glm", "regimes", "phases",
                                      "forecast", "impact", "agreement", "sweeps"};

json trimmed(json doc, const std::string& last, std::initializer_list<const char*> extra = {}) {
  bool past = false;
  for (const auto& s : kOrder) {
    if (past) {
      bool keep = false;
      for (const char* e : extra) keep |= s == e;
      if (!keep) doc.erase(s);
    }
    if (s == last) past = true;
  }
  return doc;
}

riskphase::RunResult run_with(const Globals& g, const std::function<json(json)>& edit) {
  if (g.config.empty()) throw riskphase::InvalidArgument("--config is required");
  const std::filesystem::path path(g.config);
  json doc = edit(riskphase::read_json_file(path));
  if (g.seed) doc["seed"] = *g.seed;
  const auto cfg = riskphase::parse_config(doc, std::filesystem::absolute(path).parent_path());
  return riskphase::run_pipeline(cfg, g.out);
}

void print_artifact(const riskphase::RunResult& run, const std::string& name) {
  riskphase::RunStore store(run.dir.parent_path());
  std::cout << store.artifact(run.run_id, name).dump(2) << "\n";
}

std::atomic<riskphase::Service*> g_service{nullptr};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"riskphase: incident-report risk signals and lifecycle phases"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--out", g.out, "Run directory root")->capture_default_str();
  app.add_option("--seed", g.seed, "Override the configured seed");

  std::function<void()> action;
  auto simple = [&](const char* verb, const char* help, const char* last, const char* artifact) {
    app.add_subcommand(verb, help)->callback([&, last, artifact] {
      action = [&, last, artifact] {
        const auto run = run_with(g, [&](json d) { return trimmed(std::move(d), last); });
        print_artifact(run, artifact);
      };
    });
  };

  app.add_subcommand("ingest", "Load incidents and print the monthly panel")->callback([&] {
    action = [&] {
      const auto run = run_with(g, [](json d) {
        for (const auto& s : kOrder) d.erase(s);
        return d;
      });
      print_artifact(run, "panel");
    };
  });
  simple("fit-delay", "Fit reporting-delay distributions", "delay", "delay");
  app.add_subcommand("nowcast", "Print the delay-inflated monthly panel")->callback([&] {
    action = [&] {
      const auto run = run_with(g, [](json d) {
        d = trimmed(std::move(d), "delay");
        if (!d.contains("delay")) d["delay"] = json::object();
        return d;
      });
      riskphase::RunStore store(run.dir.parent_path());
      std::cout << json{{"panel", store.artifact(run.run_id, "panel")["panel"]},
                        {"delay", store.artifact(run.run_id, "delay")}}.dump(2) << "\n";
    };
  });
  simple("exposure", "Build the exposure index and adjusted rates", "exposure", "exposure");
  simple("fit-glm", "Fit the count model and excess-risk signal", "glm", "glm");

  auto* detect = app.add_subcommand("detect", "Regime detection");
  std::string detector;
  detect->add_option("method", detector, "pelt, hmm or kmeans")->required()->check(CLI::IsMember({"pelt", "hmm", "kmeans"}));
  detect->callback([&] {
    action = [&] {
      const auto run = run_with(g, [&](json d) {
        d = trimmed(std::move(d), "regimes");
        if (!d.contains("regimes")) d["regimes"] = json::object();
        if (detector != "hmm") d["regimes"]["hmm"] = false;
        if (detector != "kmeans") d["regimes"]["kmeans"] = false;
        return d;
      });
      print_artifact(run, detector);
    };
  });

  auto* classify = app.add_subcommand("classify", "Phase timeline");
  std::optional<double> theta_low, theta_high;
  std::string framework;
  classify->add_option("--theta-low", theta_low);
  classify->add_option("--theta-high", theta_high);
  classify->add_option("--framework", framework)->check(CLI::IsMember({"three", "six"}));
  classify->callback([&] {
    action = [&] {
      const auto run = run_with(g, [&](json d) {
        d = trimmed(std::move(d), "phases");
        if (!d.contains("phases")) d["phases"] = json::object();
        if (theta_low) d["phases"]["theta_low"] = *theta_low;
        if (theta_high) d["phases"]["theta_high"] = *theta_high;
        if (!framework.empty()) d["phases"]["framework"] = framework;
        return d;
      });
      print_artifact(run, "timeline");
    };
  });
  simple("forecast", "ARIMA selection and 12-month forecast", "forecast", "forecast");

  app.add_subcommand("impact", "Intervention impact with FDR control")->callback([&] {
    action = [&] {
      const auto run = run_with(g, [](json d) { return trimmed(std::move(d), "phases", {"impact"}); });
      print_artifact(run, "impact");
    };
  });
  app.add_subcommand("agree", "Agreement with a second source")->callback([&] {
    action = [&] {
      const auto run = run_with(g, [](json d) { return trimmed(std::move(d), "phases", {"agreement"}); });
      print_artifact(run, "agreement");
    };
  });
  auto* sweep = app.add_subcommand("sweep", "Sensitivity sweeps");
  std::string axis = "theta_low";
  sweep->add_option("axis", axis, "theta_low, thresholds, half_life or alpha")
      ->check(CLI::IsMember({"theta_low", "thresholds", "half_life", "alpha"}));
  sweep->callback([&] {
    action = [&] {
      const auto run = run_with(g, [](json d) { return trimmed(std::move(d), "phases", {"sweeps"}); });
      print_artifact(run, "sweep_" + axis);
    };
  });

  auto* card = app.add_subcommand("card", "Meta-reporting card for a run");
  std::string run_id;
  bool as_json = false;
  card->add_option("--run", run_id, "Existing run id under --out");
  card->add_flag("--json", as_json, "Print JSON instead of text");
  card->callback([&] {
    action = [&] {
      std::string id = run_id;
      if (id.empty()) id = run_with(g, [](json d) { return d; }).run_id;
      riskphase::RunStore store(g.out);
      const auto c = riskphase::emit_card(store, id);
      std::cout << (as_json ? c.dump(2) + "\n" : riskphase::render_card_text(c));
    };
  });

  app.add_subcommand("run", "Run the full configured pipeline")->callback([&] {
    action = [&] {
      const auto run = run_with(g, [](json d) { return d; });
      std::cout << json{{"run_id", run.run_id},
                        {"dir", run.dir.string()},
                        {"status", run.manifest["status"]},
                        {"run_digest", run.manifest["run_digest"]},
                        {"artifacts", run.manifest["artifacts"].size()}}.dump(2) << "\n";
    };
  });

  auto* gen = app.add_subcommand("gen-synthetic", "Write a seeded step-change corpus");
  std::string gen_dir = "synthetic";
  riskphase::synth::StepCorpusSpec spec;
  gen->add_option("dir", gen_dir)->capture_default_str();
  gen->add_option("--months", spec.n_months)->capture_default_str();
  gen->add_option("--step-at", spec.step_at)->capture_default_str();
  gen->add_option("--multiplier", spec.step_multiplier)->capture_default_str();
  gen->add_option("--base-rate", spec.base_rate)->capture_default_str();
  gen->add_option("--dispersion", spec.dispersion)->capture_default_str();
  gen->callback([&] {
    action = [&] {
      if (g.seed) spec.seed = *g.seed;
      const auto corpus = riskphase::synth::make_step_corpus(spec);
      std::filesystem::create_directories(gen_dir);
      riskphase::synth::write_corpus(corpus, gen_dir);
      std::cout << corpus.records.size() << " incidents written to " << gen_dir << "\n";
    };
  });

  auto* serve = app.add_subcommand("serve", "HTTP service over the run directory");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string base = ".";
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--config-base", base, "Directory for relative paths in POSTed configs")->capture_default_str();
  serve->callback([&] {
    action = [&] {
      riskphase::Service svc(g.out, std::filesystem::absolute(base));
      g_service = &svc;
      std::signal(SIGINT, [](int) {
        if (auto* s = g_service.load()) s->stop();
      });
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!svc.serve(host, port)) throw riskphase::Error("cannot bind " + host + ":" + std::to_string(port));
    };
  });

  CLI11_PARSE(app, argc, argv);
  try {
    action();
  } catch (const riskphase::StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
