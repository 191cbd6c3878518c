#include "riskphase/month.hpp"

#include <charconv>
#include <cstdio>

#include "riskphase/errors.hpp"

namespace riskphase {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string MonthIndex::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

MonthIndex MonthIndex::parse(std::string_view text) {
  text = trim(text);
  if (text.size() != 7 && text.size() != 10) {
    throw ParseError("expected YYYY-MM, got '" + std::string(text) + "'");
  }
  if (text[4] != '-') throw ParseError("expected YYYY-MM, got '" + std::string(text) + "'");
  MonthIndex m{parse_int(text.substr(0, 4), "year"), parse_int(text.substr(5, 2), "month")};
  if (m.month < 1 || m.month > 12) throw ParseError("month out of range in '" + std::string(text) + "'");
  return m;
}

std::vector<MonthIndex> month_range(MonthIndex first, MonthIndex last) {
  std::vector<MonthIndex> out;
  if (last < first) return out;
  out.reserve(static_cast<std::size_t>(months_between(first, last) + 1));
  for (int o = first.ordinal(); o <= last.ordinal(); ++o) out.push_back(MonthIndex::from_ordinal(o));
  return out;
}

Date parse_date(std::string_view iso) {
  iso = trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw ParseError("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
  }
  const int y = parse_int(iso.substr(0, 4), "year");
  const int m = parse_int(iso.substr(5, 2), "month");
  const int d = parse_int(iso.substr(8, 2), "day");
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw ParseError("invalid calendar date '" + std::string(iso) + "'");
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

MonthIndex month_of(const Date& d) {
  return MonthIndex{static_cast<int>(d.year()), static_cast<int>(static_cast<unsigned>(d.month()))};
}

int days_between(const Date& from, const Date& to) {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

}  // namespace riskphase
