#pragma once

#include <string>

namespace mixedrank {

/// Shortest decimal text that parses back to exactly `value`.
std::string shortest_repr(double value);

/// Fixed-point text with `digits` decimals; "-0.000" is normalised to "0.000".
std::string fixed_repr(double value, int digits);

}  // namespace mixedrank
