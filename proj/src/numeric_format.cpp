#include "philoscope/numeric_format.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "philoscope/error.hpp"

namespace philoscope {

double round_half_up(double value, int decimals) {
  if (!std::isfinite(value)) return value;
  const double scale = std::pow(10.0, decimals);
  const double scaled = std::abs(value) * scale;
  const double rounded = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled));
  return std::copysign(rounded / scale, value);
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  double rounded = round_half_up(value, decimals);
  if (rounded == 0.0) rounded = 0.0;
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", decimals, rounded);
  return buf.data();
}

std::string format_signed(double value, int decimals) {
  std::string text = format_fixed(value, decimals);
  if (std::isfinite(value) && round_half_up(value, decimals) > 0.0) text.insert(text.begin(), '+');
  return text;
}

double percent_one_decimal(long long k, long long n) {
  if (n <= 0) throw Error("percentage of an empty set");
  // tenths of a percent, half away from zero: round(1000 k / n)
  const long long num = 1000 * k;
  const long long sign = (num < 0) ? -1 : 1;
  const long long tenths = sign * ((2 * std::llabs(num) + n) / (2 * n));
  return static_cast<double>(tenths) / 10.0;
}

std::string format_percent(long long k, long long n) {
  return format_fixed(percent_one_decimal(k, n), 1);
}

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

}  // namespace philoscope
