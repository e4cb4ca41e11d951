#include "rsm/fixed_point.hpp"

#include <charconv>
#include <cmath>

#include "rsm/error.hpp"

namespace rsm {
namespace {

int magnitude_bits(const QFormat& f) { return f.int_bits + f.frac_bits; }

void require_valid(const QFormat& f) {
  if (!f.valid()) {
    throw Error(ErrorKind::InvalidArgument, "invalid fixed-point format " + f.to_string());
  }
}

void require_same_format(const Fixed& a, const Fixed& b, const char* op) {
  if (a.format != b.format) {
    throw Error(ErrorKind::FormatMismatch, std::string(op) + ": operands in " + a.format.to_string() +
                                               " and " + b.format.to_string());
  }
}

int bit_length(__int128 v) {
  unsigned __int128 m = v < 0 ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  int n = 0;
  while (m != 0) {
    m >>= 1;
    ++n;
  }
  return n;
}

}  // namespace

QFormat QFormat::make(int int_bits, int frac_bits, bool is_signed) {
  QFormat f{int_bits, frac_bits, is_signed};
  require_valid(f);
  return f;
}

bool QFormat::valid() const {
  if (int_bits < 0 || frac_bits < 0) return false;
  if (width() > 64) return false;
  // raw is an int64, so unsigned words keep at most 63 magnitude bits
  if (!is_signed && magnitude_bits(*this) > 63) return false;
  return width() >= 1;
}

QFormat QFormat::parse(std::string_view text) {
  auto fail = [&]() -> QFormat {
    throw Error(ErrorKind::InvalidArgument, "cannot parse fixed-point format '" + std::string(text) +
                                                "' (expected sQ<int>.<frac> or uQ<int>.<frac>)");
  };
  if (text.size() < 5 || (text[0] != 's' && text[0] != 'u') || text[1] != 'Q') return fail();
  const bool is_signed = text[0] == 's';
  const auto dot = text.find('.', 2);
  if (dot == std::string_view::npos) return fail();
  int ib = 0;
  int fb = 0;
  const auto int_part = text.substr(2, dot - 2);
  const auto frac_part = text.substr(dot + 1);
  auto r1 = std::from_chars(int_part.data(), int_part.data() + int_part.size(), ib);
  auto r2 = std::from_chars(frac_part.data(), frac_part.data() + frac_part.size(), fb);
  if (int_part.empty() || frac_part.empty() || r1.ec != std::errc{} ||
      r1.ptr != int_part.data() + int_part.size() || r2.ec != std::errc{} ||
      r2.ptr != frac_part.data() + frac_part.size()) {
    return fail();
  }
  return make(ib, fb, is_signed);
}

std::string QFormat::to_string() const {
  return std::string(is_signed ? "sQ" : "uQ") + std::to_string(int_bits) + "." + std::to_string(frac_bits);
}

std::int64_t QFormat::min_raw() const {
  if (!is_signed) return 0;
  const int m = magnitude_bits(*this);
  if (m == 63) return INT64_MIN;
  return -(static_cast<std::int64_t>(1) << m);
}

std::int64_t QFormat::max_raw() const {
  const int m = magnitude_bits(*this);
  if (m == 63) return INT64_MAX;
  return (static_cast<std::int64_t>(1) << m) - 1;
}

double QFormat::resolution() const { return std::ldexp(1.0, -frac_bits); }

double Fixed::to_real() const { return std::ldexp(static_cast<double>(raw), -format.frac_bits); }

double to_real(const Fixed& x) { return x.to_real(); }

std::int64_t saturate(__int128 v, QFormat f) {
  if (v > f.max_raw()) return f.max_raw();
  if (v < f.min_raw()) return f.min_raw();
  return static_cast<std::int64_t>(v);
}

__int128 round_shift_right(__int128 v, int n) {
  if (n <= 0) return v;
  if (n >= 126) return 0;
  const __int128 one = 1;
  const __int128 q = v >> n;  // floor
  const __int128 rem = v - q * (one << n);
  const __int128 half = one << (n - 1);
  if (rem > half || (rem == half && (q & 1) != 0)) return q + 1;
  return q;
}

std::int64_t scale_saturate(__int128 v, int n, QFormat f) {
  if (n >= 0) {
    if (v == 0) return 0;
    if (bit_length(v) + n > 125) return v < 0 ? f.min_raw() : f.max_raw();
    return saturate(v * (static_cast<__int128>(1) << n), f);
  }
  return saturate(round_shift_right(v, -n), f);
}

Fixed from_real(double v, QFormat f) {
  require_valid(f);
  if (std::isnan(v)) throw Error(ErrorKind::InvalidArgument, "from_real: NaN input");
  const double scaled = std::nearbyint(std::ldexp(v, f.frac_bits));
  // 2^m is exact in double, unlike max_raw for m > 53
  const double upper = std::ldexp(1.0, magnitude_bits(f));
  if (scaled >= upper) return Fixed{f.max_raw(), f};
  if (f.is_signed ? scaled < -upper : scaled < 0.0) return Fixed{f.min_raw(), f};
  return Fixed{static_cast<std::int64_t>(scaled), f};
}

Fixed fx_add(const Fixed& a, const Fixed& b) {
  require_same_format(a, b, "fx_add");
  return Fixed{saturate(static_cast<__int128>(a.raw) + b.raw, a.format), a.format};
}

Fixed fx_sub(const Fixed& a, const Fixed& b) {
  require_same_format(a, b, "fx_sub");
  return Fixed{saturate(static_cast<__int128>(a.raw) - b.raw, a.format), a.format};
}

Fixed fx_mul(const Fixed& a, const Fixed& b) { return fx_mul(a, b, a.format); }

Fixed fx_mul(const Fixed& a, const Fixed& b, QFormat out) {
  require_valid(out);
  const __int128 product = static_cast<__int128>(a.raw) * b.raw;
  const int shift = out.frac_bits - (a.format.frac_bits + b.format.frac_bits);
  return Fixed{scale_saturate(product, shift, out), out};
}

Fixed fx_shift(const Fixed& a, int n) { return Fixed{scale_saturate(a.raw, n, a.format), a.format}; }

Fixed fx_convert(const Fixed& a, QFormat out) {
  require_valid(out);
  return Fixed{scale_saturate(a.raw, out.frac_bits - a.format.frac_bits, out), out};
}

std::strong_ordering fx_cmp(const Fixed& a, const Fixed& b) {
  require_same_format(a, b, "fx_cmp");
  return a.raw <=> b.raw;
}

FixedVector quantize(std::span<const double> values, QFormat f) {
  FixedVector out{f, {}};
  out.raw.reserve(values.size());
  for (double v : values) out.raw.push_back(from_real(v, f).raw);
  return out;
}

std::vector<double> to_real(const FixedVector& x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (auto r : x.raw) out.push_back(std::ldexp(static_cast<double>(r), -x.format.frac_bits));
  return out;
}

}  // namespace rsm
