#include "osslc/calendar.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "osslc/error.hpp"

namespace osslc {
namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc{} && ptr == text.data() + pos + len;
}

[[noreturn]] void bad_timestamp(std::string_view text, const char* why) {
  throw ParseError("timestamp", 0,
                   "unparseable timestamp '" + std::string(text) + "': " + why);
}

}  // namespace

YearMonth YearMonth::of(Timestamp t) {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(t)};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

YearMonth YearMonth::parse(std::string_view text) {
  int year = 0;
  int month = 0;
  if (text.size() != 7 || text[4] != '-' || !read_int(text, 0, 4, year) ||
      !read_int(text, 5, 2, month) || month < 1 || month > 12) {
    throw ParseError("month", 0, "expected YYYY-MM, got '" + std::string(text) + "'");
  }
  return {year, static_cast<unsigned>(month)};
}

std::string YearMonth::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year_, month_);
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  int y, mo, d, h, mi, s;
  if (text.size() < 19 || !read_int(text, 0, 4, y) || text[4] != '-' ||
      !read_int(text, 5, 2, mo) || text[7] != '-' || !read_int(text, 8, 2, d) ||
      (text[10] != 'T' && text[10] != 't' && text[10] != ' ') ||
      !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, s)) {
    bad_timestamp(text, "expected YYYY-MM-DDTHH:MM:SS");
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  long offset_seconds = 0;
  if (pos == text.size()) {
    bad_timestamp(text, "missing UTC designator");
  } else if ((text[pos] == 'Z' || text[pos] == 'z') && pos + 1 == text.size()) {
    // UTC
  } else if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() &&
             text[pos + 3] == ':') {
    int oh, om;
    if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om) || oh > 23 ||
        om > 59) {
      bad_timestamp(text, "bad offset");
    }
    offset_seconds = (oh * 3600L + om * 60L) * (text[pos] == '-' ? -1 : 1);
  } else {
    bad_timestamp(text, "trailing characters");
  }

  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) bad_timestamp(text, "field out of range");
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s} - std::chrono::seconds{offset_seconds};
}

std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace osslc
