#pragma once

#include <array>
#include <string_view>

namespace rsm {

enum class Variant { Exact, Stable, Base2, Inverse, CordicExp, Reduced };

inline constexpr std::array<Variant, 6> kAllVariants = {Variant::Exact,   Variant::Stable,    Variant::Base2,
                                                        Variant::Inverse, Variant::CordicExp, Variant::Reduced};

// exact, stable, base2, inverse, cordic-exp, reduced
std::string_view variant_name(Variant v);
// Throws Error(Usage) for unknown names.
Variant parse_variant(std::string_view name);

}  // namespace rsm
