#include <numeric>
#include <sstream>

#include "doctest.h"
#include "riskphase/errors.hpp"
#include "riskphase/ingest.hpp"
#include "riskphase/synthetic.hpp"

using namespace riskphase;

namespace {

const char* kCsv =
    "incident_id,incident_date,report_date,subdomain,severity,group,description\n"
    "A1,2020-01-05,2020-01-20,deepfake,Minor,alpha,\"voice clone, bank call\"\n"
    "A1,2020-01-05,2020-03-02,deepfake,Minor,alpha,\"voice clone, bank call\"\n"
    "A2,2020-03-10,2020-03-11,deepfake;media,Severe,,face swap video\n"
    "A3,1850-01-01,2020-01-01,deepfake,,,bad date\n"
    "A4,2020-02-01,2020-02-02,av,Negligible,beta,lane drift\n"
    "A5,2020-03-15,2020-05-01,Deepfake,Substantial,beta,election clip\n";

IncidentCorpus sample() {
  std::istringstream in(kCsv);
  return load_incidents(in);
}

}  // namespace

TEST_CASE("incident rows fold into records with sorted report dates") {
  const auto c = sample();
  REQUIRE(c.records.size() == 4);
  CHECK(c.records[0].incident_id == "A1");
  CHECK(c.records[0].report_dates.size() == 2);
  CHECK(c.records[0].first_report_date() == parse_date("2020-01-20"));
  CHECK(c.records[0].description == "voice clone, bank call");
  CHECK(c.records[1].subdomain_tags.count("media") == 1);
  REQUIRE(c.rejects.size() == 1);
  CHECK(c.rejects[0].line == 5);
}

TEST_CASE("bad header is a schema mismatch") {
  std::istringstream in("id,date\nx,2020-01-01\n");
  CHECK_THROWS_AS(load_incidents(in), SchemaMismatch);
}

TEST_CASE("monthly aggregation zero-fills and filters by tag") {
  const auto c = sample();
  CorpusFilter f;
  f.subdomain = "deepfake";
  const auto p = aggregate_monthly(c.records, f, CountBasis::IncidentDate);
  REQUIRE(p.size() == 3);
  CHECK(p.months.front() == MonthIndex{2020, 1});
  CHECK(p.raw_count == std::vector<long>{1, 0, 2});
  CHECK(p.severity_sum[2] == doctest::Approx(60.0));

  const auto by_report = aggregate_monthly(c.records, f, CountBasis::FirstReportDate);
  CHECK(by_report.months.back() == MonthIndex{2020, 5});
  CHECK(std::accumulate(by_report.raw_count.begin(), by_report.raw_count.end(), 0L) == 3);

  CorpusFilter none;
  none.keyword_includes = {"nothing matches this"};
  CHECK_THROWS_AS(aggregate_monthly(c.records, none, CountBasis::IncidentDate), EmptyAfterFilter);
}

TEST_CASE("explicit date bounds extend the panel span") {
  const auto c = sample();
  CorpusFilter f;
  f.date_min = parse_date("2019-11-01");
  f.date_max = parse_date("2020-06-30");
  const auto p = aggregate_monthly(c.records, f, CountBasis::IncidentDate);
  CHECK(p.months.front() == MonthIndex{2019, 11});
  CHECK(p.months.back() == MonthIndex{2020, 6});
  CHECK(p.raw_count.front() == 0);
}

TEST_CASE("group panels partition the ungrouped panel") {
  const auto corpus = synth::make_step_corpus();
  CorpusFilter f;
  const auto whole = aggregate_monthly(corpus.records, f, CountBasis::IncidentDate);
  const auto parts = group_decompose(corpus.records, {"alpha-labs", "beta-media"}, f, CountBasis::IncidentDate);
  REQUIRE(parts.size() == 3);
  for (std::size_t i = 0; i < whole.size(); ++i) {
    long sum = 0;
    for (const auto& [name, p] : parts) {
      CHECK(p.months == whole.months);
      sum += p.raw_count[i];
    }
    CHECK(sum == whole.raw_count[i]);
  }
  CHECK_THROWS_AS(group_decompose(corpus.records, {"nobody"}, f, CountBasis::IncidentDate), UnknownGroup);
}

TEST_CASE("media gaps carry the series mean") {
  const auto c = sample();
  auto p = aggregate_monthly(c.records, CorpusFilter{}, CountBasis::IncidentDate);
  attach_media(p, {{MonthIndex{2020, 1}, 10.0}, {MonthIndex{2020, 3}, 40.0}});
  CHECK(p.media_index == std::vector<double>{10.0, 25.0, 40.0});
}

TEST_CASE("auxiliary loaders validate their columns") {
  std::istringstream stars("repo,event_month,stars_added\norg/a,2020-01,5\norg/b,2020-02,7\n");
  CHECK(load_star_events(stars).size() == 2);
  std::istringstream bad("month,exposure\n2020-01,-3\n");
  CHECK_THROWS(load_exposure_csv(bad));
  std::istringstream counts("month,count\n2020-01,3\n2020-02,0\n");
  const auto cs = load_count_series(counts);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].value == 3.0);
}
