#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace riskphase {

/// Calendar month. Arithmetic is by whole months; there is no day component.
struct MonthIndex {
  int year = 1970;
  int month = 1;  // 1..12

  constexpr int ordinal() const { return year * 12 + (month - 1); }

  static constexpr MonthIndex from_ordinal(int ord) {
    int y = ord >= 0 ? ord / 12 : -((-ord + 11) / 12);
    return MonthIndex{y, ord - y * 12 + 1};
  }

  constexpr MonthIndex plus(int months) const { return from_ordinal(ordinal() + months); }

  friend constexpr auto operator<=>(const MonthIndex&, const MonthIndex&) = default;

  /// "YYYY-MM"
  std::string str() const;
  /// Accepts "YYYY-MM" or a full ISO date "YYYY-MM-DD" (day ignored).
  static MonthIndex parse(std::string_view text);
};

/// Signed number of months from `from` to `to`.
constexpr int months_between(MonthIndex from, MonthIndex to) { return to.ordinal() - from.ordinal(); }

/// Inclusive, gap-free range.
std::vector<MonthIndex> month_range(MonthIndex first, MonthIndex last);

using Date = std::chrono::year_month_day;

Date parse_date(std::string_view iso);
std::string format_date(const Date& d);
MonthIndex month_of(const Date& d);
int days_between(const Date& from, const Date& to);

}  // namespace riskphase
