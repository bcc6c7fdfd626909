#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace osslc {

using Timestamp = std::chrono::sys_seconds;

// A calendar month, used as the bucket key for every monthly series.
class YearMonth {
 public:
  constexpr YearMonth() = default;
  constexpr YearMonth(int year, unsigned month) : year_(year), month_(month) {}

  static YearMonth of(Timestamp t);
  // Accepts "YYYY-MM"; throws ParseError otherwise.
  static YearMonth parse(std::string_view text);

  int year() const noexcept { return year_; }
  unsigned month() const noexcept { return month_; }

  // Months since 0000-01; differences give month counts.
  constexpr long serial() const noexcept {
    return static_cast<long>(year_) * 12 + static_cast<long>(month_) - 1;
  }
  static constexpr YearMonth from_serial(long serial) {
    long y = serial >= 0 ? serial / 12 : -((-serial + 11) / 12);
    return {static_cast<int>(y), static_cast<unsigned>(serial - y * 12 + 1)};
  }

  YearMonth operator+(long months) const { return from_serial(serial() + months); }
  long operator-(const YearMonth& other) const { return serial() - other.serial(); }
  YearMonth& operator++() { return *this = *this + 1; }

  auto operator<=>(const YearMonth&) const = default;

  std::string str() const;

 private:
  int year_ = 1970;
  unsigned month_ = 1;
};

// RFC 3339 instant. Offsets other than Z are folded into UTC.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

}  // namespace osslc
