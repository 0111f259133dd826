#pragma once

#include <string>

namespace sresn {

// Shortest representation that parses back to the same double.
// Non-finite values print as nan, inf, -inf.
std::string format_double(double v);

}  // namespace sresn
