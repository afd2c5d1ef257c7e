#include "evanno/timeutil.hpp"

#include <cstdio>
#include <regex>

#include "evanno/error.hpp"

namespace evanno {

using namespace std::chrono;

Timestamp parse_iso8601(std::string_view text) {
  static const std::regex re(
      R"((\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(?:\.(\d{1,9}))?(Z|z|[+-]\d{2}:?\d{2})?)");
  std::cmatch m;
  if (!std::regex_match(text.data(), text.data() + text.size(), m, re)) {
    throw InputError("invalid ISO-8601 timestamp: " + std::string(text));
  }
  const year_month_day ymd{year{std::stoi(m[1])}, month{static_cast<unsigned>(std::stoi(m[2]))},
                           day{static_cast<unsigned>(std::stoi(m[3]))}};
  const int hh = std::stoi(m[4]), mm = std::stoi(m[5]), ss = std::stoi(m[6]);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
    throw InputError("invalid ISO-8601 timestamp: " + std::string(text));
  }
  Timestamp t = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
  if (m[7].matched) {
    auto frac = m[7].str();
    frac.resize(3, '0');
    t += milliseconds{std::stoi(frac)};
  }
  if (m[8].matched) {
    const auto tz = m[8].str();
    if (tz != "Z" && tz != "z") {
      const int sign = tz[0] == '-' ? -1 : 1;
      const int oh = std::stoi(tz.substr(1, 2));
      const int om = std::stoi(tz.substr(tz.size() - 2));
      t -= sign * (hours{oh} + minutes{om});
    }
  }
  return t;
}

std::string format_iso8601(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[40];
  const auto ms = hms.subseconds().count();
  if (ms != 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()), static_cast<long>(ms));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
  }
  return buf;
}

double seconds_between(Timestamp start, Timestamp end) {
  return duration<double>(end - start).count();
}

Timestamp now_utc() { return time_point_cast<milliseconds>(system_clock::now()); }

}  // namespace evanno
