#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "riskphase/month.hpp"
#include "riskphase/series.hpp"

namespace riskphase {

struct IncidentRecord {
  std::string incident_id;
  Date incident_date;
  std::vector<Date> report_dates;  // sorted, unique, non-empty
  std::set<std::string> subdomain_tags;
  std::optional<SeverityLevel> severity;
  std::optional<std::string> group;
  std::string description;

  Date first_report_date() const { return report_dates.front(); }
};

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct IncidentCorpus {
  std::vector<IncidentRecord> records;  // ordered by incident_id
  std::vector<RejectedRow> rejects;
  std::vector<std::string> warnings;
};

/// Header: incident_id,incident_date,report_date,subdomain,severity,group,description
/// One row per (incident, report) pair. Rows with unparseable or pre-1900
/// dates go to `rejects`; a bad header throws SchemaMismatch.
IncidentCorpus load_incidents(std::istream& in);
void write_incidents(std::ostream& out, const std::vector<IncidentRecord>& records);

struct CorpusFilter {
  std::optional<std::string> subdomain;
  std::optional<Date> date_min;
  std::optional<Date> date_max;
  std::vector<std::string> keyword_includes;
  std::vector<std::string> keyword_excludes;
  std::optional<std::string> group;

  bool accepts(const IncidentRecord& r) const;
};

enum class CountBasis { IncidentDate, FirstReportDate };

std::string_view to_string(CountBasis basis);
CountBasis parse_count_basis(std::string_view text);

/// Monthly counts over the min..max observed month, zero-filled. Throws
/// EmptyAfterFilter when nothing passes.
MonthlyPanel aggregate_monthly(const std::vector<IncidentRecord>& records, const CorpusFilter& filter,
                               CountBasis basis, const SeverityScale& scale = {});

/// One panel per requested group plus "other" for the remainder; all panels
/// share the month range of the ungrouped panel and sum to it.
std::map<std::string, MonthlyPanel> group_decompose(const std::vector<IncidentRecord>& records,
                                                    const std::vector<std::string>& groups,
                                                    const CorpusFilter& filter, CountBasis basis);

// Auxiliary inputs.

struct MonthValue {
  MonthIndex month;
  double value = 0.0;
};

/// `month,exposure` (positive reals).
std::vector<MonthValue> load_exposure_csv(std::istream& in);
/// `month,index` (0-100).
std::vector<MonthValue> load_media_csv(std::istream& in);

struct StarEvent {
  std::string repo;
  MonthIndex month;
  double stars_added = 0.0;
};

/// `month,count` (non-negative), e.g. a second reporting source.
std::vector<MonthValue> load_count_series(std::istream& in);

/// `repo,event_month,stars_added`.
std::vector<StarEvent> load_star_events(std::istream& in);

/// Attaches a media column; months without a value carry the series mean.
void attach_media(MonthlyPanel& panel, const std::vector<MonthValue>& media);

}  // namespace riskphase
