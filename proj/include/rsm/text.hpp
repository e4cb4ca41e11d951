#pragma once

#include <string>

namespace rsm {

// Shortest decimal that round-trips to the same double.
std::string format_real(double v);

}  // namespace rsm
