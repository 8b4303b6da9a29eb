#pragma once

#include <string>
#include <string_view>

namespace ncsbound {

enum class TimeUnit { Seconds, Milliseconds };

std::string_view to_string(TimeUnit unit);
TimeUnit parse_time_unit(std::string_view text);

/// Seconds in one `unit`.
double seconds_per(TimeUnit unit);

/// Explicit conversion; nothing in the library converts silently.
double convert_time(double value, TimeUnit from, TimeUnit to);

/// A duration carrying its unit.
struct TimeValue {
  double value = 0.0;
  TimeUnit unit = TimeUnit::Seconds;

  TimeValue in(TimeUnit target) const { return {convert_time(value, unit, target), target}; }
};

/// Parses "3.5ms", "0.0035s" or "3.5" (the latter takes `default_unit`).
TimeValue parse_time_value(std::string_view text, TimeUnit default_unit);

/// Parses a capacity or rate into bytes/second. Suffixes bps, kbps, Mbps,
/// Gbps count bits; Bps, kBps, MBps, GBps count bytes. A bare number is
/// already bytes/second.
double parse_rate(std::string_view text);

}  // namespace ncsbound
