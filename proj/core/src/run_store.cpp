#include "riskphase/run_store.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "riskphase/errors.hpp"
#include "riskphase/phases.hpp"

namespace riskphase {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("cannot allocate digest context");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json declaration_to_json(const ExpertDeclaration& d) {
  auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };
  return {{"analyst", d.analyst},
          {"domain", d.domain},
          {"framework", d.framework},
          {"phase", d.phase},
          {"parameters",
           {{"theta_low", opt(d.theta_low)},
            {"theta_high", opt(d.theta_high)},
            {"penalty", opt(d.penalty)},
            {"window", opt(d.window)}}},
          {"rationale", d.rationale},
          {"timestamp", d.timestamp}};
}

ExpertDeclaration declaration_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("declaration must be a JSON object");
  ExpertDeclaration d;
  try {
    d.analyst = j.value("analyst", "");
    d.domain = j.value("domain", "");
    d.framework = j.value("framework", "three");
    d.phase = j.value("phase", "");
    d.rationale = j.value("rationale", "");
    if (j.contains("parameters") && j["parameters"].is_object()) {
      const auto& p = j["parameters"];
      auto num = [&](const char* key) -> std::optional<double> {
        if (!p.contains(key) || p[key].is_null()) return std::nullopt;
        return p[key].get<double>();
      };
      d.theta_low = num("theta_low");
      d.theta_high = num("theta_high");
      d.penalty = num("penalty");
      if (p.contains("window") && !p["window"].is_null()) d.window = p["window"].get<int>();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed declaration: ") + e.what());
  }
  if (d.analyst.empty()) throw InvalidArgument("declaration needs an analyst id");
  if (d.rationale.find_first_not_of(" \t\r\n") == std::string::npos) throw InvalidArgument("declaration needs a rationale");
  const auto fw = parse_framework(d.framework);
  bool known = false;
  if (fw == PhaseFramework::Six) {
    for (int k = 0; k < kSixPhaseCount; ++k) known |= to_string(static_cast<SixPhase>(k)) == d.phase;
  } else {
    for (int k = 0; k < kThreePhaseCount; ++k) known |= to_string(static_cast<ThreePhase>(k)) == d.phase;
  }
  if (!known) throw InvalidArgument("unknown phase '" + d.phase + "' for the " + d.framework + "-phase framework");
  if (d.theta_low && d.theta_high && !(*d.theta_low < *d.theta_high)) {
    throw InvalidArgument("theta_low must be below theta_high");
  }
  return d;
}

RunStore::RunStore(std::filesystem::path root) : root_(std::move(root)) { std::filesystem::create_directories(root_); }

std::filesystem::path RunStore::run_dir(const std::string& run_id) const {
  const bool ok = !run_id.empty() && run_id.find_first_not_of("0123456789abcdef") == std::string::npos;
  if (!ok) throw RunNotFound("unknown run '" + run_id + "'");
  return root_ / run_id;
}

bool RunStore::has_run(const std::string& run_id) const {
  try {
    return std::filesystem::exists(run_dir(run_id) / "manifest.json");
  } catch (const RunNotFound&) {
    return false;
  }
}

std::vector<std::string> RunStore::list_runs() const {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(root_)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "manifest.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

json RunStore::manifest(const std::string& run_id) const {
  if (!has_run(run_id)) throw RunNotFound("unknown run '" + run_id + "'");
  return read_json_file(run_dir(run_id) / "manifest.json");
}

bool RunStore::has_artifact(const std::string& run_id, const std::string& name) const {
  const auto m = manifest(run_id);
  return m.contains("artifacts") && m["artifacts"].contains(name);
}

json RunStore::artifact(const std::string& run_id, const std::string& name) const {
  const auto m = manifest(run_id);
  if (!m.contains("artifacts") || !m["artifacts"].contains(name)) {
    throw ArtifactNotFound("run " + run_id + " has no artifact '" + name + "'");
  }
  return read_json_file(run_dir(run_id) / m["artifacts"][name]["file"].get<std::string>());
}

json RunStore::append_declaration(const std::string& run_id, ExpertDeclaration decl) {
  const auto m = manifest(run_id);
  if (decl.domain.empty()) decl.domain = m.value("domain", "");
  if (decl.timestamp.empty()) decl.timestamp = utc_timestamp();
  json record = declaration_to_json(decl);
  record["run_id"] = run_id;
  std::lock_guard lock(log_mutex_);
  std::ofstream out(run_dir(run_id) / "declarations.jsonl", std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot open declaration log for run " + run_id);
  out << record.dump() << "\n";
  out.flush();
  return record;
}

std::vector<json> RunStore::declarations(const std::string& run_id) const {
  if (!has_run(run_id)) throw RunNotFound("unknown run '" + run_id + "'");
  std::vector<json> out;
  std::lock_guard lock(log_mutex_);
  std::ifstream in(run_dir(run_id) / "declarations.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace riskphase
