#pragma once

#include <string>

namespace philoscope {

// Rounds half away from zero at `decimals` places. A 1e-9 relative guard
// absorbs binary representation error, so 17.4999999999 (meaning 17.5)
// rounds to 17.5 at one decimal and 2.35 rounds to 2.4.
double round_half_up(double value, int decimals);

// Fixed-point text after round_half_up; never prints "-0.0".
std::string format_fixed(double value, int decimals);

// Like format_fixed with an explicit leading '+' for positive values.
std::string format_signed(double value, int decimals);

// Percentage k/n at one decimal, half-up, computed in exact integer
// arithmetic: format_percent(11, 30) == "36.7".
std::string format_percent(long long k, long long n);
double percent_one_decimal(long long k, long long n);

// Shortest text that parses back to the same double.
std::string format_exact(double value);

}  // namespace philoscope
