#include "rsm/text.hpp"

#include <charconv>

namespace rsm {

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace rsm
