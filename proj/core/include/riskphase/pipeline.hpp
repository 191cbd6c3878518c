#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskphase/delay.hpp"
#include "riskphase/forecast.hpp"
#include "riskphase/glm.hpp"
#include "riskphase/impact.hpp"
#include "riskphase/ingest.hpp"
#include "riskphase/json_io.hpp"
#include "riskphase/pelt.hpp"
#include "riskphase/phases.hpp"

namespace riskphase {

using MonthWindow = std::pair<MonthIndex, MonthIndex>;  // inclusive

struct InputPaths {
  std::optional<std::filesystem::path> incidents;
  std::optional<std::filesystem::path> exposure;
  std::optional<std::filesystem::path> media;
  std::optional<std::filesystem::path> stars;
  std::optional<std::filesystem::path> interventions;
  std::optional<std::filesystem::path> second_source;
};

struct IngestConfig {
  CorpusFilter filter;
  CountBasis basis = CountBasis::IncidentDate;
  std::map<SeverityLevel, double> severity_weights;  // empty = defaults
  std::vector<std::string> groups;
};

struct DelayConfig {
  double percentile = 0.95;
  double cap = 5.0;
  std::optional<Date> as_of;  // defaults to the last day of the final panel month
  DelayFitOptions fit;
};

struct ExposureConfig {
  std::string source = "stars";  // "stars" or "external"
  double half_life = 12.0;
  bool scale = true;
  double scale_lo = 10.0;
  double scale_hi = 100.0;
  double per = 1e6;
};

struct GlmConfig {
  CountFormula formula{true, true, false, true};
  CountFamily family = CountFamily::NegBin;
  std::optional<double> alpha;  // nullopt: grid search over alpha_grid
  std::vector<double> alpha_grid{0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  double epsilon = 0.5;
  int slope_window = 3;
};

struct RegimeConfig {
  std::vector<double> penalty_grid = default_penalty_grid();
  std::optional<double> penalty;            // fixed penalty
  std::optional<PenaltyLevel> penalty_level;  // formula penalty
  std::size_t min_segment = 2;
  bool hmm = true;
  std::vector<int> hmm_states{2, 3, 4};
  int hmm_restarts = 5;
  bool kmeans = true;
  std::vector<int> k_range{2, 3, 4, 5};
  double trend_weight = 2.0;
  int kmeans_restarts = 10;
};

struct PhaseConfig {
  PhaseFramework framework = PhaseFramework::Three;
  std::optional<double> theta_low;   // nullopt: calibrate from the reference window
  std::optional<double> theta_high;
  std::optional<MonthWindow> reference;     // nullopt: months before the largest upward shift
  std::optional<MonthWindow> spc_baseline;  // nullopt: same as the reference window
  double trend_cut = 0.05;
  std::optional<double> rapid_cut;  // nullopt: max(P75(segment slopes), 0.05)
  double segment_zero_rate = 0.5;
};

struct ForecastConfig {
  std::size_t horizon = 12;
  std::vector<ArimaOrder> grid = default_arima_grid();
};

struct ImpactConfig {
  int window = 3;
  int wave_window = 6;
  FdrMethod method = FdrMethod::BH;
};

struct AgreementConfig {
  int max_lag = 6;
};

struct SweepConfig {
  std::vector<double> theta_low;
  std::vector<double> theta_high;
  std::vector<double> half_life;
  std::vector<double> alpha;
};

struct PipelineConfig {
  std::string domain = "domain";
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;  // relative input paths resolve here
  InputPaths inputs;
  IngestConfig ingest;
  std::optional<DelayConfig> delay;
  std::optional<ExposureConfig> exposure;
  std::optional<GlmConfig> glm;
  std::optional<RegimeConfig> regimes;
  std::optional<PhaseConfig> phases;
  std::optional<ForecastConfig> forecast;
  std::optional<ImpactConfig> impact;
  std::optional<AgreementConfig> agreement;
  std::optional<SweepConfig> sweeps;
  json source;  // the document as given
};

/// Sections present in the document switch their stage on. Throws InvalidArgument.
PipelineConfig parse_config(const json& doc, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Reference window rule: months before the largest upward jump in segment means.
std::optional<MonthWindow> auto_reference_window(const Segmentation& seg, const RiskSeries& risk);

/// Thresholds for a segmentation: calibration, SPC baseline and rapid cut per config.
PhaseThresholds derive_thresholds(const PhaseConfig& cfg, const Segmentation& seg, const RiskSeries& risk,
                                  std::vector<std::string>* warnings = nullptr);

struct RunResult {
  std::string run_id;
  std::filesystem::path dir;
  json manifest;
};

/// Runs every configured stage and seals the run under <out_root>/<run_id>.
/// A sealed run with the same id is returned as is. A failing stage leaves a
/// manifest with status "failed" and throws StageError naming the stage.
RunResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_root);

/// Content address of a config: canonical parameters plus input digests.
std::string compute_run_id(const PipelineConfig& cfg);

}  // namespace riskphase
