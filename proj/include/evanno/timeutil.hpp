#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace evanno {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Accepts YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM). Throws InputError.
Timestamp parse_iso8601(std::string_view text);

// UTC, millisecond precision when nonzero: 2022-02-20T08:15:00Z or
// 2022-02-20T08:15:00.250Z.
std::string format_iso8601(Timestamp t);

double seconds_between(Timestamp start, Timestamp end);

Timestamp now_utc();

}  // namespace evanno
