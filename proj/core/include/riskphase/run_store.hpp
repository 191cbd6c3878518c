#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riskphase/json_io.hpp"

namespace riskphase {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

struct ExpertDeclaration {
  std::string analyst;
  std::string domain;
  std::string framework = "three";
  std::string phase;
  std::optional<double> theta_low;
  std::optional<double> theta_high;
  std::optional<double> penalty;
  std::optional<int> window;
  std::string rationale;
  std::string timestamp;
};

json declaration_to_json(const ExpertDeclaration& d);
/// Throws InvalidArgument for missing analyst, empty rationale or an unknown phase.
ExpertDeclaration declaration_from_json(const json& j);

/// Plain-file run directory: <root>/<run_id>/{manifest.json, <artifact>.json, declarations.jsonl}.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;

  bool has_run(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  /// Throws RunNotFound.
  json manifest(const std::string& run_id) const;
  /// Throws RunNotFound or ArtifactNotFound.
  json artifact(const std::string& run_id, const std::string& name) const;
  bool has_artifact(const std::string& run_id, const std::string& name) const;

  /// Appends one line to the run's declaration log and returns the stored record.
  json append_declaration(const std::string& run_id, ExpertDeclaration decl);
  std::vector<json> declarations(const std::string& run_id) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex log_mutex_;
};

}  // namespace riskphase
