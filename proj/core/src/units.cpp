#include "ncsbound/units.hpp"

#include <array>
#include <charconv>
#include <utility>

#include "ncsbound/error.hpp"

namespace ncsbound {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits "12.5Mbps" into 12.5 and "Mbps".
std::pair<double, std::string_view> split_number(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{}) throw InvalidArgument("not a number: '" + std::string(text) + "'");
  std::string_view rest(ptr, static_cast<std::size_t>(text.data() + text.size() - ptr));
  return {value, trim(rest)};
}

}  // namespace

std::string_view to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Seconds:
      return "s";
    case TimeUnit::Milliseconds:
      return "ms";
  }
  return "?";
}

TimeUnit parse_time_unit(std::string_view text) {
  text = trim(text);
  if (text == "s" || text == "seconds" || text == "sec") return TimeUnit::Seconds;
  if (text == "ms" || text == "milliseconds" || text == "msec") return TimeUnit::Milliseconds;
  throw InvalidArgument("unknown time unit '" + std::string(text) + "'");
}

double seconds_per(TimeUnit unit) {
  return unit == TimeUnit::Seconds ? 1.0 : 1e-3;
}

double convert_time(double value, TimeUnit from, TimeUnit to) {
  if (from == to) return value;
  return value * seconds_per(from) / seconds_per(to);
}

TimeValue parse_time_value(std::string_view text, TimeUnit default_unit) {
  auto [value, suffix] = split_number(text);
  if (suffix.empty()) return {value, default_unit};
  return {value, parse_time_unit(suffix)};
}

double parse_rate(std::string_view text) {
  auto [value, suffix] = split_number(text);
  if (suffix.empty()) return value;

  struct Suffix {
    std::string_view name;
    double bytes_per_second;
  };
  static constexpr std::array<Suffix, 8> kSuffixes{{
      {"bps", 1.0 / 8.0},
      {"kbps", 1e3 / 8.0},
      {"Mbps", 1e6 / 8.0},
      {"Gbps", 1e9 / 8.0},
      {"Bps", 1.0},
      {"kBps", 1e3},
      {"MBps", 1e6},
      {"GBps", 1e9},
  }};
  for (const auto& s : kSuffixes) {
    if (s.name == suffix) return value * s.bytes_per_second;
  }
  throw InvalidArgument("unknown rate suffix '" + std::string(suffix) + "'");
}

}  // namespace ncsbound
