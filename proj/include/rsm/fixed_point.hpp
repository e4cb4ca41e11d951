#pragma once

// Parameterized signed/unsigned fixed-point words modelling an accelerator
// datapath. Every operation saturates to the format range and rounds
// half-to-even.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsm {

struct QFormat {
  int int_bits = 0;
  int frac_bits = 0;
  bool is_signed = true;

  // Throws Error(InvalidArgument) unless the format fits a 64-bit raw word.
  static QFormat make(int int_bits, int frac_bits, bool is_signed = true);
  // "sQ7.8" / "uQ0.16"
  static QFormat parse(std::string_view text);

  std::string to_string() const;
  int width() const { return int_bits + frac_bits + (is_signed ? 1 : 0); }
  std::int64_t min_raw() const;
  std::int64_t max_raw() const;
  double resolution() const;
  bool valid() const;

  friend bool operator==(const QFormat&, const QFormat&) = default;
};

struct Fixed {
  std::int64_t raw = 0;
  QFormat format;

  double to_real() const;
  friend bool operator==(const Fixed&, const Fixed&) = default;
};

Fixed from_real(double v, QFormat f);
double to_real(const Fixed& x);

// Clamp an arbitrary wide integer into the raw range of `f`.
std::int64_t saturate(__int128 v, QFormat f);
// v / 2^n rounded half-to-even; n may be >= 128.
__int128 round_shift_right(__int128 v, int n);
// v * 2^n for any n, rounded half-to-even and saturated into `f`.
std::int64_t scale_saturate(__int128 v, int n, QFormat f);

Fixed fx_add(const Fixed& a, const Fixed& b);
Fixed fx_sub(const Fixed& a, const Fixed& b);
Fixed fx_mul(const Fixed& a, const Fixed& b);
Fixed fx_mul(const Fixed& a, const Fixed& b, QFormat out);
Fixed fx_shift(const Fixed& a, int n);
Fixed fx_convert(const Fixed& a, QFormat out);
std::strong_ordering fx_cmp(const Fixed& a, const Fixed& b);

// A vector of words sharing one format; the storage layout the kernels use.
struct FixedVector {
  QFormat format;
  std::vector<std::int64_t> raw;

  std::size_t size() const { return raw.size(); }
  Fixed operator[](std::size_t i) const { return Fixed{raw[i], format}; }
};

FixedVector quantize(std::span<const double> values, QFormat f);
std::vector<double> to_real(const FixedVector& x);

}  // namespace rsm
