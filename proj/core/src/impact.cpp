#include "riskphase/impact.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "riskphase/csv.hpp"
#include "riskphase/errors.hpp"
#include "riskphase/stats.hpp"

namespace riskphase {

namespace {

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view to_string(InterventionType t) {
  switch (t) {
    case InterventionType::Fatal: return "fatal";
    case InterventionType::Regulatory: return "regulatory";
    case InterventionType::Company: return "company";
    case InterventionType::Deployment: return "deployment";
    case InterventionType::Platform: return "platform";
    case InterventionType::Standards: return "standards";
  }
  return "?";
}

std::string_view to_string(ExpectedEffect e) { return e == ExpectedEffect::Mitigation ? "mitigation" : "shock"; }

std::string_view to_string(ImpactDirection d) {
  switch (d) {
    case ImpactDirection::Mitigation: return "mitigation";
    case ImpactDirection::Deterioration: return "deterioration";
    case ImpactDirection::None: return "none";
  }
  return "?";
}

std::string_view to_string(FdrMethod m) { return m == FdrMethod::BH ? "bh" : "by"; }

InterventionType parse_intervention_type(std::string_view text) {
  const auto s = lower_trim(text);
  for (auto t : {InterventionType::Fatal, InterventionType::Regulatory, InterventionType::Company,
                 InterventionType::Deployment, InterventionType::Platform, InterventionType::Standards}) {
    if (s == to_string(t)) return t;
  }
  throw ParseError("unknown intervention type '" + std::string(text) + "'");
}

ExpectedEffect parse_expected_effect(std::string_view text) {
  const auto s = lower_trim(text);
  if (s == "mitigation") return ExpectedEffect::Mitigation;
  if (s == "shock") return ExpectedEffect::Shock;
  throw ParseError("unknown expected effect '" + std::string(text) + "'");
}

FdrMethod parse_fdr_method(std::string_view text) {
  const auto s = lower_trim(text);
  if (s == "bh") return FdrMethod::BH;
  if (s == "by") return FdrMethod::BY;
  throw InvalidArgument("unknown FDR method '" + std::string(text) + "'");
}

std::vector<InterventionEvent> load_interventions(std::istream& in, int window_months) {
  const auto header = csv::read_row(in);
  if (!header) throw SchemaMismatch("interventions file is empty");
  std::vector<std::string> cols;
  for (const auto& h : *header) cols.push_back(lower_trim(h));
  const std::vector<std::string> base{"name", "month", "type", "expected_effect"};
  const bool has_wave = cols.size() == 5 && cols[4] == "wave";
  if (!(std::equal(base.begin(), base.end(), cols.begin(), cols.begin() + std::min(cols.size(), base.size())) &&
        (cols.size() == 4 || has_wave))) {
    throw SchemaMismatch("interventions header must be name,month,type,expected_effect[,wave]");
  }
  std::vector<InterventionEvent> out;
  while (auto row = csv::read_row(in)) {
    if (row->size() == 1 && lower_trim(row->front()).empty()) continue;
    if (row->size() != cols.size()) throw SchemaMismatch("intervention row has the wrong number of fields");
    InterventionEvent e;
    e.name = (*row)[0];
    e.month = MonthIndex::parse((*row)[1]);
    e.type = parse_intervention_type((*row)[2]);
    e.expected_effect = parse_expected_effect((*row)[3]);
    e.window_months = window_months;
    if (has_wave && !lower_trim((*row)[4]).empty()) e.wave = (*row)[4];
    out.push_back(std::move(e));
  }
  return out;
}

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientWindow("Welch test needs two values per group");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = stats::sample_variance(a) / na;
  const double vb = stats::sample_variance(b) / nb;
  const double diff = stats::mean(b) - stats::mean(a);
  WelchTest out;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    if (diff == 0.0) return out;
    out.t = diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.df = na + nb - 2.0;
    out.p_two_sided = 0.0;
    return out;
  }
  out.t = diff / std::sqrt(se2);
  out.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  out.p_two_sided = std::min(1.0, 2.0 * stats::student_t_sf(std::abs(out.t), out.df));
  return out;
}

ImpactResult event_impact(const RiskSeries& risk, const std::string& name, MonthIndex anchor, int window) {
  if (window < 1) throw InvalidArgument("impact window must be at least one month");
  if (risk.size() == 0) throw InsufficientWindow("empty risk series");
  std::vector<double> pre, post;
  const MonthIndex first = risk.months.front();
  const MonthIndex last = risk.months.back();
  ImpactResult r;
  r.event = name;
  r.anchor = anchor;
  r.window = window;
  for (int k = 1; k <= window; ++k) {
    const auto m = anchor.plus(-k);
    if (auto pos = risk.position(m)) pre.insert(pre.begin(), risk.z[*pos]);
    else r.truncated = true;
  }
  for (int k = 0; k < window; ++k) {
    const auto m = anchor.plus(k);
    if (auto pos = risk.position(m)) post.push_back(risk.z[*pos]);
    else r.truncated = true;
  }
  if (pre.size() < 2 || post.size() < 2) {
    throw InsufficientWindow(name + ": fewer than two months on one side of " + anchor.str() + " within " +
                             first.str() + ".." + last.str());
  }
  r.n_pre = pre.size();
  r.n_post = post.size();
  r.pre_mean = stats::mean(pre);
  r.post_mean = stats::mean(post);
  r.delta = r.post_mean - r.pre_mean;
  const auto w = welch_t_test(pre, post);
  r.t_stat = w.t;
  r.df = w.df;
  r.p_raw = w.p_two_sided;
  r.p_fdr = r.p_raw;
  return r;
}

ImpactResult event_impact(const RiskSeries& risk, const InterventionEvent& event) {
  return event_impact(risk, event.name, event.month, event.window_months);
}

std::vector<double> fdr_adjust(std::span<const double> p_values, FdrMethod method) {
  const std::size_t m = p_values.size();
  std::vector<double> out(m);
  if (m == 0) return out;
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  double c = 1.0;
  if (method == FdrMethod::BY) {
    c = 0.0;
    for (std::size_t i = 1; i <= m; ++i) c += 1.0 / static_cast<double>(i);
  }
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double v = p_values[order[r]] * static_cast<double>(m) * c / static_cast<double>(r + 1);
    running = std::min(running, v);
    out[order[r]] = std::clamp(running, p_values[order[r]], 1.0);
  }
  return out;
}

void apply_fdr(std::vector<ImpactResult>& results, FdrMethod method, double alpha) {
  std::vector<double> p;
  for (const auto& r : results) p.push_back(r.p_raw);
  const auto adj = fdr_adjust(p, method);
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    r.p_fdr = adj[i];
    r.direction = ImpactDirection::None;
    if (r.p_fdr < alpha && r.delta < 0.0) r.direction = ImpactDirection::Mitigation;
    if (r.p_fdr < alpha && r.delta > 0.0) r.direction = ImpactDirection::Deterioration;
  }
}

ImpactFamily impact_family(const RiskSeries& risk, std::span<const InterventionEvent> events, FdrMethod method) {
  ImpactFamily fam;
  fam.method = method;
  for (const auto& e : events) {
    try {
      fam.results.push_back(event_impact(risk, e));
    } catch (const InsufficientWindow& err) {
      fam.skipped.emplace_back(e.name, err.what());
    }
  }
  apply_fdr(fam.results, method);
  return fam;
}

EffectConfusion expected_vs_actual(std::span<const InterventionEvent> events, std::span<const ImpactResult> results) {
  EffectConfusion t;
  for (const auto& r : results) {
    auto it = std::find_if(events.begin(), events.end(), [&](const InterventionEvent& e) { return e.name == r.event; });
    if (it == events.end()) throw InvalidArgument("no event named '" + r.event + "'");
    const int row = it->expected_effect == ExpectedEffect::Mitigation ? 0 : 1;
    const int col = r.direction == ImpactDirection::Mitigation ? 0 : r.direction == ImpactDirection::None ? 1 : 2;
    ++t.counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    ++t.row_totals[static_cast<std::size_t>(row)];
    ++t.column_totals[static_cast<std::size_t>(col)];
    ++t.total;
  }
  return t;
}

ImpactFamily wave_impact(const RiskSeries& risk, const std::map<std::string, std::vector<InterventionEvent>>& waves,
                         int window, FdrMethod method) {
  ImpactFamily fam;
  fam.method = method;
  for (const auto& [name, events] : waves) {
    if (events.empty()) {
      fam.skipped.emplace_back(name, "wave has no events");
      continue;
    }
    MonthIndex anchor = events.front().month;
    for (const auto& e : events) anchor = std::min(anchor, e.month);
    try {
      fam.results.push_back(event_impact(risk, name, anchor, window));
    } catch (const InsufficientWindow& err) {
      fam.skipped.emplace_back(name, err.what());
    }
  }
  apply_fdr(fam.results, method);
  return fam;
}

std::map<std::string, std::vector<InterventionEvent>> group_waves(std::span<const InterventionEvent> events) {
  std::map<std::string, std::vector<InterventionEvent>> out;
  for (const auto& e : events) {
    if (e.wave) out[*e.wave].push_back(e);
  }
  return out;
}

}  // namespace riskphase
