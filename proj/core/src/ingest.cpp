#include "riskphase/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

#include "riskphase/csv.hpp"
#include "riskphase/errors.hpp"

namespace riskphase {

namespace {

constexpr std::array<std::string_view, 7> kIncidentHeader = {
    "incident_id", "incident_date", "report_date", "subdomain", "severity", "group", "description"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trimmed(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void strip_bom(std::string& s) {
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
      static_cast<unsigned char>(s[2]) == 0xBF) {
    s.erase(0, 3);
  }
}

void expect_header(std::istream& in, std::initializer_list<std::string_view> names) {
  auto header = csv::read_row(in);
  if (!header) throw SchemaMismatch("empty input: missing header row");
  if (!header->empty()) strip_bom(header->front());
  if (header->size() != names.size()) {
    throw SchemaMismatch("header has " + std::to_string(header->size()) + " columns, expected " +
                         std::to_string(names.size()));
  }
  std::size_t i = 0;
  for (auto name : names) {
    if (lower(trimmed((*header)[i])) != name) {
      throw SchemaMismatch("header column " + std::to_string(i + 1) + " is '" + (*header)[i] + "', expected '" +
                           std::string(name) + "'");
    }
    ++i;
  }
}

Date parse_record_date(const std::string& text) {
  const Date d = parse_date(text);
  if (static_cast<int>(d.year()) < 1900) throw ParseError("date before 1900: " + text);
  return d;
}

double parse_double(const std::string& raw, const char* what) {
  const std::string text = trimmed(raw);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError(std::string("bad ") + what + " '" + text + "'");
  }
  return value;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

Date basis_date(const IncidentRecord& r, CountBasis basis) {
  return basis == CountBasis::IncidentDate ? r.incident_date : r.first_report_date();
}

MonthlyPanel empty_panel(MonthIndex first, MonthIndex last, bool with_severity) {
  MonthlyPanel p;
  p.months = month_range(first, last);
  p.raw_count.assign(p.months.size(), 0);
  p.nowcast_count.assign(p.months.size(), 0.0);
  if (with_severity) p.severity_sum.assign(p.months.size(), 0.0);
  return p;
}

void add_record(MonthlyPanel& p, const IncidentRecord& r, CountBasis basis, const SeverityScale& scale) {
  const auto pos = p.position(month_of(basis_date(r, basis)));
  if (!pos) throw InvalidArgument("record month outside panel range");
  p.raw_count[*pos] += 1;
  p.nowcast_count[*pos] += 1.0;
  if (p.has_severity() && r.severity) p.severity_sum[*pos] += scale.weight(*r.severity);
}

std::vector<const IncidentRecord*> filtered(const std::vector<IncidentRecord>& records, const CorpusFilter& filter,
                                            CountBasis basis) {
  if (filter.date_min && filter.date_max && *filter.date_max < *filter.date_min) {
    throw InvalidArgument("filter date_min is after date_max");
  }
  std::vector<const IncidentRecord*> out;
  for (const auto& r : records) {
    if (!filter.accepts(r)) continue;
    const Date d = basis_date(r, basis);
    if (filter.date_min && d < *filter.date_min) continue;
    if (filter.date_max && d > *filter.date_max) continue;
    out.push_back(&r);
  }
  return out;
}

}  // namespace

IncidentCorpus load_incidents(std::istream& in) {
  auto header = csv::read_row(in);
  if (!header) throw SchemaMismatch("empty input: missing header row");
  if (!header->empty()) strip_bom(header->front());
  if (header->size() != kIncidentHeader.size()) {
    throw SchemaMismatch("incident header has " + std::to_string(header->size()) + " columns, expected 7");
  }
  for (std::size_t i = 0; i < kIncidentHeader.size(); ++i) {
    if (lower(trimmed((*header)[i])) != kIncidentHeader[i]) {
      throw SchemaMismatch("incident header column " + std::to_string(i + 1) + " is '" + (*header)[i] +
                           "', expected '" + std::string(kIncidentHeader[i]) + "'");
    }
  }

  IncidentCorpus corpus;
  std::map<std::string, IncidentRecord> by_id;
  std::size_t line = 1;
  while (auto row = csv::read_row(in)) {
    ++line;
    if (row->size() == 1 && trimmed(row->front()).empty()) continue;
    if (row->size() != kIncidentHeader.size()) {
      corpus.rejects.push_back({line, "expected 7 fields, got " + std::to_string(row->size())});
      continue;
    }
    const std::string id = trimmed((*row)[0]);
    if (id.empty()) {
      corpus.rejects.push_back({line, "empty incident_id"});
      continue;
    }
    Date incident_date, report_date;
    std::optional<SeverityLevel> severity;
    try {
      incident_date = parse_record_date((*row)[1]);
      report_date = parse_record_date((*row)[2]);
      const std::string sev = trimmed((*row)[4]);
      if (!sev.empty()) severity = parse_severity(sev);
    } catch (const Error& e) {
      corpus.rejects.push_back({line, e.what()});
      continue;
    }

    auto [it, inserted] = by_id.try_emplace(id);
    IncidentRecord& rec = it->second;
    if (inserted) {
      rec.incident_id = id;
      rec.incident_date = incident_date;
    } else if (incident_date != rec.incident_date) {
      corpus.warnings.push_back("incident " + id + ": conflicting incident_date " + format_date(incident_date) +
                                " vs " + format_date(rec.incident_date) + "; keeping earliest");
      rec.incident_date = std::min(rec.incident_date, incident_date);
    }
    rec.report_dates.push_back(report_date);
    std::string tags = (*row)[3];
    std::size_t start = 0;
    while (start <= tags.size()) {
      const auto end = std::min(tags.find(';', start), tags.size());
      std::string tag = trimmed(tags.substr(start, end - start));
      if (!tag.empty()) rec.subdomain_tags.insert(lower(tag));
      start = end + 1;
    }
    if (!rec.severity && severity) rec.severity = severity;
    const std::string group = trimmed((*row)[5]);
    if (!rec.group && !group.empty()) rec.group = group;
    if (rec.description.empty()) rec.description = (*row)[6];
  }

  corpus.records.reserve(by_id.size());
  for (auto& [id, rec] : by_id) {
    std::sort(rec.report_dates.begin(), rec.report_dates.end());
    rec.report_dates.erase(std::unique(rec.report_dates.begin(), rec.report_dates.end()), rec.report_dates.end());
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

void write_incidents(std::ostream& out, const std::vector<IncidentRecord>& records) {
  csv::write_row(out, std::vector<std::string>(kIncidentHeader.begin(), kIncidentHeader.end()));
  for (const auto& r : records) {
    std::string tags;
    for (const auto& t : r.subdomain_tags) {
      if (!tags.empty()) tags.push_back(';');
      tags += t;
    }
    for (const auto& report : r.report_dates) {
      csv::write_row(out, {r.incident_id, format_date(r.incident_date), format_date(report), tags,
                           r.severity ? std::string(to_string(*r.severity)) : std::string(),
                           r.group.value_or(""), r.description});
    }
  }
}

bool CorpusFilter::accepts(const IncidentRecord& r) const {
  if (subdomain && !r.subdomain_tags.contains(lower(*subdomain))) return false;
  if (group && r.group != group) return false;
  if (!keyword_includes.empty()) {
    const bool hit = std::any_of(keyword_includes.begin(), keyword_includes.end(),
                                 [&](const std::string& k) { return contains_ci(r.description, k); });
    if (!hit) return false;
  }
  for (const auto& k : keyword_excludes) {
    if (contains_ci(r.description, k)) return false;
  }
  return true;
}

std::string_view to_string(CountBasis basis) {
  return basis == CountBasis::IncidentDate ? "incident-date" : "first-report-date";
}

CountBasis parse_count_basis(std::string_view text) {
  if (text == "incident-date") return CountBasis::IncidentDate;
  if (text == "first-report-date") return CountBasis::FirstReportDate;
  throw InvalidArgument("unknown count basis '" + std::string(text) + "'");
}

MonthlyPanel aggregate_monthly(const std::vector<IncidentRecord>& records, const CorpusFilter& filter,
                               CountBasis basis, const SeverityScale& scale) {
  const auto kept = filtered(records, filter, basis);
  if (kept.empty()) throw EmptyAfterFilter("no incident records pass the filter");
  MonthIndex first = month_of(basis_date(*kept.front(), basis));
  MonthIndex last = first;
  bool any_severity = false;
  for (const auto* r : kept) {
    const MonthIndex m = month_of(basis_date(*r, basis));
    first = std::min(first, m);
    last = std::max(last, m);
    any_severity = any_severity || r->severity.has_value();
  }
  if (filter.date_min) first = std::min(first, month_of(*filter.date_min));
  if (filter.date_max) last = std::max(last, month_of(*filter.date_max));
  MonthlyPanel panel = empty_panel(first, last, any_severity);
  for (const auto* r : kept) add_record(panel, *r, basis, scale);
  return panel;
}

std::map<std::string, MonthlyPanel> group_decompose(const std::vector<IncidentRecord>& records,
                                                    const std::vector<std::string>& groups,
                                                    const CorpusFilter& filter, CountBasis basis) {
  const auto kept = filtered(records, filter, basis);
  if (kept.empty()) throw EmptyAfterFilter("no incident records pass the filter");
  for (const auto& g : groups) {
    if (g == "other") throw InvalidArgument("'other' is reserved for the residual panel");
    const bool known = std::any_of(records.begin(), records.end(), [&](const IncidentRecord& r) { return r.group == g; });
    if (!known) throw UnknownGroup("no record carries group '" + g + "'");
  }
  MonthIndex first = month_of(basis_date(*kept.front(), basis));
  MonthIndex last = first;
  bool any_severity = false;
  for (const auto* r : kept) {
    const MonthIndex m = month_of(basis_date(*r, basis));
    first = std::min(first, m);
    last = std::max(last, m);
    any_severity = any_severity || r->severity.has_value();
  }
  if (filter.date_min) first = std::min(first, month_of(*filter.date_min));
  if (filter.date_max) last = std::max(last, month_of(*filter.date_max));
  std::map<std::string, MonthlyPanel> out;
  for (const auto& g : groups) out.emplace(g, empty_panel(first, last, any_severity));
  out.emplace("other", empty_panel(first, last, any_severity));
  const SeverityScale scale;
  for (const auto* r : kept) {
    auto it = r->group ? out.find(*r->group) : out.end();
    if (it == out.end() || it->first == "other") it = out.find("other");
    add_record(it->second, *r, basis, scale);
  }
  return out;
}

std::vector<MonthValue> load_exposure_csv(std::istream& in) {
  expect_header(in, {"month", "exposure"});
  std::vector<MonthValue> out;
  while (auto row = csv::read_row(in)) {
    if (row->size() == 1 && trimmed(row->front()).empty()) continue;
    if (row->size() != 2) throw SchemaMismatch("exposure rows need 2 fields");
    const double v = parse_double((*row)[1], "exposure");
    if (v < 0.0) throw ParseError("negative exposure");
    out.push_back({MonthIndex::parse((*row)[0]), v});
  }
  std::sort(out.begin(), out.end(), [](const MonthValue& a, const MonthValue& b) { return a.month < b.month; });
  return out;
}

std::vector<MonthValue> load_media_csv(std::istream& in) {
  expect_header(in, {"month", "index"});
  std::vector<MonthValue> out;
  while (auto row = csv::read_row(in)) {
    if (row->size() == 1 && trimmed(row->front()).empty()) continue;
    if (row->size() != 2) throw SchemaMismatch("media rows need 2 fields");
    const double v = parse_double((*row)[1], "media index");
    if (v < 0.0 || v > 100.0) throw ParseError("media index outside 0-100");
    out.push_back({MonthIndex::parse((*row)[0]), v});
  }
  std::sort(out.begin(), out.end(), [](const MonthValue& a, const MonthValue& b) { return a.month < b.month; });
  return out;
}

std::vector<MonthValue> load_count_series(std::istream& in) {
  expect_header(in, {"month", "count"});
  std::vector<MonthValue> out;
  while (auto row = csv::read_row(in)) {
    if (row->size() == 1 && trimmed(row->front()).empty()) continue;
    if (row->size() != 2) throw SchemaMismatch("count rows need 2 fields");
    const double v = parse_double((*row)[1], "count");
    if (v < 0.0) throw ParseError("negative count");
    out.push_back({MonthIndex::parse((*row)[0]), v});
  }
  std::sort(out.begin(), out.end(), [](const MonthValue& a, const MonthValue& b) { return a.month < b.month; });
  return out;
}

std::vector<StarEvent> load_star_events(std::istream& in) {
  expect_header(in, {"repo", "event_month", "stars_added"});
  std::vector<StarEvent> out;
  while (auto row = csv::read_row(in)) {
    if (row->size() == 1 && trimmed(row->front()).empty()) continue;
    if (row->size() != 3) throw SchemaMismatch("star-event rows need 3 fields");
    out.push_back({trimmed((*row)[0]), MonthIndex::parse((*row)[1]), parse_double((*row)[2], "stars_added")});
  }
  return out;
}

void attach_media(MonthlyPanel& panel, const std::vector<MonthValue>& media) {
  if (media.empty()) throw InvalidArgument("empty media series");
  double sum = 0.0;
  for (const auto& mv : media) sum += mv.value;
  const double fill = sum / static_cast<double>(media.size());
  panel.media_index.assign(panel.size(), fill);
  for (const auto& mv : media) {
    if (auto pos = panel.position(mv.month)) panel.media_index[*pos] = mv.value;
  }
}

}  // namespace riskphase
