#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "riskphase/impact.hpp"
#include "riskphase/ingest.hpp"

// Seeded fixture generators used by tests, benchmarks and the example configs.
namespace riskphase::synth {

struct StepCorpusSpec {
  MonthIndex first{2017, 3};
  int n_months = 103;
  int step_at = 60;             // first month (0-based) of the raised regime
  double base_rate = 40.0;      // expected incidents per month at mean exposure
  double step_multiplier = 1.8;
  double dispersion = 0.05;     // gamma-Poisson alpha
  double star_base = 40.0;      // stars added per month, month 0
  double star_growth = 6.0;     // extra stars per month per month
  double half_life = 12.0;
  double delay_median_days = 20.0;
  double delay_sdlog = 1.0;
  double second_report_share = 0.2;
  std::string subdomain = "deepfake";
  std::uint64_t seed = 20170301;
};

struct StepCorpus {
  std::vector<IncidentRecord> records;
  std::vector<StarEvent> stars;
  std::vector<MonthValue> media;
  std::vector<MonthValue> second_source;
  std::vector<InterventionEvent> interventions;
  std::vector<double> expected;  // true mean count per month
  Date as_of;
  StepCorpusSpec spec;
};

/// Monthly incidents whose rate follows the depreciated star exposure and
/// jumps by `step_multiplier` at `step_at`. Reports arriving after the last
/// day of the final month are cut off.
StepCorpus make_step_corpus(const StepCorpusSpec& spec = {});

/// Writes incidents.csv, stars.csv, media.csv, second_source.csv and
/// interventions.csv into `dir`.
void write_corpus(const StepCorpus& corpus, const std::filesystem::path& dir);

/// Gaussian piecewise-constant signal: levels[k] on [bounds[k], bounds[k+1]).
std::vector<double> piecewise_signal(const std::vector<std::size_t>& bounds, const std::vector<double>& levels,
                                     double noise_sd, std::uint64_t seed);

}  // namespace riskphase::synth
