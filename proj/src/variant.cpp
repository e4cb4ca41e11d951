#include "rsm/variant.hpp"

#include <string>

#include "rsm/error.hpp"

namespace rsm {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Exact:
      return "exact";
    case Variant::Stable:
      return "stable";
    case Variant::Base2:
      return "base2";
    case Variant::Inverse:
      return "inverse";
    case Variant::CordicExp:
      return "cordic-exp";
    case Variant::Reduced:
      return "reduced";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw Error(ErrorKind::Usage, "unknown variant '" + std::string(name) +
                                    "' (expected exact, stable, base2, inverse, cordic-exp or reduced)");
}

}  // namespace rsm
