#include "riskphase/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "riskphase/csv.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/exposure.hpp"

namespace riskphase::synth {

namespace {

Date first_day(MonthIndex m) {
  return Date{std::chrono::year{m.year}, std::chrono::month{static_cast<unsigned>(m.month)}, std::chrono::day{1}};
}

Date last_day(MonthIndex m) {
  return Date{std::chrono::year{m.year} / std::chrono::month{static_cast<unsigned>(m.month)} / std::chrono::last};
}

Date add_days(const Date& d, int days) {
  return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

StepCorpus make_step_corpus(const StepCorpusSpec& spec) {
  if (spec.n_months < 12 || spec.step_at <= 0 || spec.step_at >= spec.n_months) {
    throw InvalidArgument("step corpus needs 12+ months and an interior step");
  }
  std::mt19937_64 rng(spec.seed);
  StepCorpus out;
  out.spec = spec;
  const MonthIndex last = spec.first.plus(spec.n_months - 1);
  out.as_of = last_day(last);

  for (int t = 0; t < spec.n_months; ++t) {
    out.stars.push_back({"org/model-kit", spec.first.plus(t), spec.star_base + spec.star_growth * t});
  }
  const auto index = scale_range(depreciated_installed_base(out.stars, spec.half_life, spec.first, last));
  double mean_exposure = 0.0;
  for (double v : index.value) mean_exposure += v;
  mean_exposure /= static_cast<double>(index.value.size());

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::lognormal_distribution<double> delay(std::log(spec.delay_median_days), spec.delay_sdlog);
  const std::array<SeverityLevel, 4> levels{SeverityLevel::Negligible, SeverityLevel::Minor, SeverityLevel::Substantial,
                                            SeverityLevel::Severe};
  const std::array<const char*, 3> groups{"alpha-labs", "beta-media", ""};

  double media = 30.0;
  int serial = 0;
  for (int t = 0; t < spec.n_months; ++t) {
    const MonthIndex m = spec.first.plus(t);
    media = std::clamp(media + 4.0 * gauss(rng), 0.0, 100.0);
    out.media.push_back({m, std::round(media * 10.0) / 10.0});

    const double lift = t >= spec.step_at ? spec.step_multiplier : 1.0;
    const double mu = spec.base_rate * index.value[static_cast<std::size_t>(t)] / mean_exposure * lift;
    out.expected.push_back(mu);
    double lambda = mu;
    if (spec.dispersion > 0.0) {
      std::gamma_distribution<double> g(1.0 / spec.dispersion, spec.dispersion);
      lambda *= g(rng);
    }
    std::poisson_distribution<int> pois(std::max(lambda, 1e-9));
    const int n = pois(rng);

    std::poisson_distribution<int> second(0.5 * mu + 2.0);
    out.second_source.push_back({m, static_cast<double>(second(rng))});

    const Date start = first_day(m);
    const int days_in_month = days_between(start, last_day(m)) + 1;
    std::uniform_int_distribution<int> day(0, days_in_month - 1);
    for (int i = 0; i < n; ++i) {
      IncidentRecord r;
      r.incident_id = "SYN-" + std::to_string(100000 + serial++);
      r.incident_date = add_days(start, day(rng));
      const Date first_report = add_days(r.incident_date, static_cast<int>(std::floor(delay(rng))));
      if (first_report > out.as_of) continue;
      r.report_dates.push_back(first_report);
      if (unit(rng) < spec.second_report_share) {
        const Date later = add_days(first_report, 1 + static_cast<int>(std::floor(delay(rng))));
        if (later <= out.as_of) r.report_dates.push_back(later);
      }
      r.subdomain_tags.insert(spec.subdomain);
      if (unit(rng) < 0.3) r.subdomain_tags.insert("media");
      r.severity = levels[static_cast<std::size_t>(std::min(3.0, std::floor(unit(rng) * unit(rng) * 4.0)))];
      const char* g = groups[static_cast<std::size_t>(std::min(2.0, std::floor(unit(rng) * 3.0)))];
      if (*g) r.group = g;
      r.description = "synthetic " + spec.subdomain + " incident " + std::to_string(serial);
      out.records.push_back(std::move(r));
    }
  }

  struct Planned {
    const char* name;
    int offset;
    InterventionType type;
    ExpectedEffect effect;
    const char* wave;
  };
  const Planned planned[] = {
      {"platform policy update", 14, InterventionType::Platform, ExpectedEffect::Mitigation, "wave-1"},
      {"standards body draft", 18, InterventionType::Standards, ExpectedEffect::Mitigation, "wave-1"},
      {"model weights release", 40, InterventionType::Deployment, ExpectedEffect::Shock, "wave-2"},
      {"regulator guidance", 47, InterventionType::Regulatory, ExpectedEffect::Mitigation, "wave-2"},
      {"consumer app launch", spec.step_at, InterventionType::Company, ExpectedEffect::Shock, "wave-3"},
      {"takedown campaign", spec.step_at + 12, InterventionType::Platform, ExpectedEffect::Mitigation, "wave-4"},
      {"statute enacted", spec.step_at + 20, InterventionType::Regulatory, ExpectedEffect::Mitigation, "wave-4"},
  };
  for (const auto& p : planned) {
    if (p.offset < 3 || p.offset + 3 > spec.n_months) continue;
    out.interventions.push_back({p.name, spec.first.plus(p.offset), p.type, p.effect, 3, std::string(p.wave)});
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const IncidentRecord& a, const IncidentRecord& b) { return a.incident_id < b.incident_id; });
  return out;
}

void write_corpus(const StepCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "incidents.csv");
    write_incidents(f, corpus.records);
  }
  {
    std::ofstream f(dir / "stars.csv");
    csv::write_row(f, {"repo", "event_month", "stars_added"});
    for (const auto& s : corpus.stars) csv::write_row(f, {s.repo, s.month.str(), fmt(s.stars_added)});
  }
  {
    std::ofstream f(dir / "media.csv");
    csv::write_row(f, {"month", "index"});
    for (const auto& m : corpus.media) csv::write_row(f, {m.month.str(), fmt(m.value)});
  }
  {
    std::ofstream f(dir / "second_source.csv");
    csv::write_row(f, {"month", "count"});
    for (const auto& m : corpus.second_source) csv::write_row(f, {m.month.str(), fmt(m.value)});
  }
  {
    std::ofstream f(dir / "interventions.csv");
    csv::write_row(f, {"name", "month", "type", "expected_effect", "wave"});
    for (const auto& e : corpus.interventions) {
      csv::write_row(f, {e.name, e.month.str(), std::string(to_string(e.type)), std::string(to_string(e.expected_effect)),
                         e.wave.value_or("")});
    }
  }
}

std::vector<double> piecewise_signal(const std::vector<std::size_t>& bounds, const std::vector<double>& levels,
                                     double noise_sd, std::uint64_t seed) {
  if (bounds.size() != levels.size() + 1 || bounds.front() != 0) throw InvalidArgument("bad piecewise layout");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_sd);
  std::vector<double> out;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    for (std::size_t t = bounds[k]; t < bounds[k + 1]; ++t) out.push_back(levels[k] + (noise_sd > 0.0 ? gauss(rng) : 0.0));
  }
  return out;
}

}  // namespace riskphase::synth
