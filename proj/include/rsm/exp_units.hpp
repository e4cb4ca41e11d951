#pragma once

// Exponential evaluators: the double-precision reference plus two
// hardware-style approximations (base-2 shift + LUT, hyperbolic CORDIC).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsm/fixed_point.hpp"

namespace rsm {

// log2(e) and ln(2) rounded to 62 fractional bits.
inline constexpr std::int64_t kLog2eQ62 = 6653256548922161246;
inline constexpr std::int64_t kLn2Q62 = 3196577161300663915;
inline constexpr int kConstFracBits = 62;

// kLog2eQ62 as a double (nearest double to log2(e)).
double log2e();

// e^x in double; +inf once e^x leaves the double range.
double exp_reference(double x);

// y*log2(e) = shift + frac with shift = floor(...), frac in [0, 1).
struct Base2Decomposition {
  std::int64_t shift = 0;
  double frac = 0.0;
};

Base2Decomposition exp_base2_decompose(double y);

// 2^(a / 2^addr_bits) for every address, rounded into `value_format`.
class ExpLut {
 public:
  ExpLut(int addr_bits, QFormat value_format, std::vector<std::int64_t> entries);

  int addr_bits() const { return addr_bits_; }
  QFormat value_format() const { return value_format_; }
  std::size_t size() const { return entries_.size(); }
  Fixed operator[](std::size_t address) const { return Fixed{entries_[address], value_format_}; }
  const std::vector<std::int64_t>& raw_entries() const { return entries_; }
  std::uint64_t storage_bits() const;

  // CSV with header "address,raw,real".
  void write_csv(std::ostream& out) const;
  // Accepts any table whose rows are addresses 0..2^n-1 in order with raw
  // words in [1, 2) that never decrease; throws Error(InputFormat) otherwise.
  static ExpLut read_csv(std::istream& in, QFormat value_format);

 private:
  int addr_bits_;
  QFormat value_format_;
  std::vector<std::int64_t> entries_;
};

// Throws Error(InvalidArgument) for addr_bits outside [1, 24] or a format
// that cannot hold 2 - ulp.
ExpLut build_lut(int addr_bits, QFormat value_format);

// e^y as 2^shift * lut[floor(frac * 2^addr_bits)], computed on the raw word
// with the Q62 log2(e) constant. Result in the LUT value format, or `out`.
Fixed exp_base2(const Fixed& y, const ExpLut& lut);
Fixed exp_base2(const Fixed& y, const ExpLut& lut, QFormat out);

class CordicConfig {
 public:
  // Throws Error(InvalidArgument) for fewer than 4 iterations or a word
  // format that is unsigned or lacks an integer bit.
  CordicConfig(int iterations, QFormat word_format);

  int iterations() const { return iterations_; }
  QFormat word_format() const { return word_format_; }
  // 1 / prod sqrt(1 - 2^-2i) over the executed micro-rotations.
  double gain_inverse() const { return gain_inverse_; }
  std::int64_t gain_inverse_raw() const { return gain_inverse_raw_; }
  // Shift index of every micro-rotation, repeats included.
  const std::vector<int>& schedule() const { return schedule_; }
  // atanh(2^-i) in the word format, indexed by shift i.
  std::int64_t atanh_raw(int shift) const { return atanh_raw_[static_cast<std::size_t>(shift)]; }

 private:
  int iterations_;
  QFormat word_format_;
  double gain_inverse_;
  std::int64_t gain_inverse_raw_;
  std::vector<int> schedule_;
  std::vector<std::int64_t> atanh_raw_;
};

// e^x = 2^u * (cosh r + sinh r) with u = round(x*log2 e) and |r| <= ln2/2;
// the rotation runs on the word format and the result saturates into it.
Fixed exp_cordic(const Fixed& x, const CordicConfig& cfg);

// Micro-rotation shift indices with the hyperbolic repeats 4, 13, 40, 121, ...
std::vector<int> cordic_schedule(int iterations);

}  // namespace rsm
