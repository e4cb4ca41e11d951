#include "rsm/exp_units.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "rsm/error.hpp"
#include "rsm/text.hpp"

namespace rsm {
namespace {

constexpr int kMaxLutAddrBits = 24;
// Beyond this many binary orders of magnitude every word format saturates
// or flushes to zero.
constexpr std::int64_t kShiftClamp = 512;

int clamp_shift(__int128 n) {
  return static_cast<int>(std::clamp<__int128>(n, -kShiftClamp, kShiftClamp));
}

}  // namespace

double log2e() { return std::ldexp(static_cast<double>(kLog2eQ62), -kConstFracBits); }

double exp_reference(double x) { return std::exp(x); }

Base2Decomposition exp_base2_decompose(double y) {
  if (!std::isfinite(y)) throw Error(ErrorKind::InvalidArgument, "exp_base2_decompose: non-finite input");
  const double t = y * log2e();
  const double u = std::floor(t);
  if (std::fabs(u) > 0x1p62) throw Error(ErrorKind::Overflow, "exp_base2_decompose: exponent out of range");
  double v = t - u;
  auto shift = static_cast<std::int64_t>(u);
  // t slightly below an integer can round t - floor(t) up to 1
  if (v >= 1.0) {
    shift += 1;
    v = 0.0;
  }
  return Base2Decomposition{shift, v};
}

ExpLut::ExpLut(int addr_bits, QFormat value_format, std::vector<std::int64_t> entries)
    : addr_bits_(addr_bits), value_format_(value_format), entries_(std::move(entries)) {
  if (entries_.size() != (std::size_t{1} << addr_bits_)) {
    throw Error(ErrorKind::InvalidArgument, "ExpLut: entry count does not match address bits");
  }
}

std::uint64_t ExpLut::storage_bits() const {
  return static_cast<std::uint64_t>(entries_.size()) * static_cast<std::uint64_t>(value_format_.width());
}

void ExpLut::write_csv(std::ostream& out) const {
  out << "address,raw,real\n";
  for (std::size_t a = 0; a < entries_.size(); ++a) {
    out << a << ',' << entries_[a] << ',' << format_real((*this)[a].to_real()) << '\n';
  }
}

ExpLut ExpLut::read_csv(std::istream& in, QFormat value_format) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) -> ExpLut {
    throw Error(ErrorKind::InputFormat, "LUT CSV line " + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) {
    line_no = 1;
    return fail("missing header");
  }
  ++line_no;
  if (line != "address,raw,real") return fail("expected header 'address,raw,real'");

  const std::int64_t one = static_cast<std::int64_t>(1) << value_format.frac_bits;
  std::vector<std::int64_t> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::int64_t address = 0;
    std::int64_t raw = 0;
    double real = 0.0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(p, end, address);
    if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != ',') return fail("bad address field");
    auto r2 = std::from_chars(r1.ptr + 1, end, raw);
    if (r2.ec != std::errc{} || r2.ptr == end || *r2.ptr != ',') return fail("bad raw field");
    auto r3 = std::from_chars(r2.ptr + 1, end, real);
    if (r3.ec != std::errc{} || r3.ptr != end) return fail("bad real field");
    if (address != static_cast<std::int64_t>(entries.size())) return fail("addresses must be consecutive from 0");
    if (raw < one || raw >= 2 * one) return fail("entry outside [1, 2)");
    if (std::fabs(Fixed{raw, value_format}.to_real() - real) > value_format.resolution() / 2) {
      return fail("real column disagrees with raw column");
    }
    if (!entries.empty() && raw < entries.back()) return fail("entries must be non-decreasing");
    entries.push_back(raw);
  }
  const std::size_t n = entries.size();
  if (n < 2 || (n & (n - 1)) != 0) return fail("row count must be a power of two >= 2");
  int bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return ExpLut(bits, value_format, std::move(entries));
}

ExpLut build_lut(int addr_bits, QFormat value_format) {
  if (addr_bits < 1 || addr_bits > kMaxLutAddrBits) {
    throw Error(ErrorKind::InvalidArgument, "build_lut: addr_bits must be in [1, 24]");
  }
  if (!value_format.valid() || value_format.int_bits < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "build_lut: value format " + value_format.to_string() + " cannot represent 2 - ulp");
  }
  const std::size_t n = std::size_t{1} << addr_bits;
  const std::int64_t one = static_cast<std::int64_t>(1) << value_format.frac_bits;
  std::vector<std::int64_t> entries(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double v = std::exp2(std::ldexp(static_cast<double>(a), -addr_bits));
    // coarse value formats may round the top entries up to 2.0
    entries[a] = std::min(from_real(v, value_format).raw, 2 * one - 1);
  }
  return ExpLut(addr_bits, value_format, std::move(entries));
}

Fixed exp_base2(const Fixed& y, const ExpLut& lut) { return exp_base2(y, lut, lut.value_format()); }

Fixed exp_base2(const Fixed& y, const ExpLut& lut, QFormat out) {
  if (!out.valid()) throw Error(ErrorKind::InvalidArgument, "exp_base2: invalid output format");
  const int frac = y.format.frac_bits + kConstFracBits;
  const __int128 t = static_cast<__int128>(y.raw) * kLog2eQ62;
  const __int128 shift = t >> frac;  // floor, also for negative t
  const __int128 fraction = t - shift * (static_cast<__int128>(1) << frac);
  const auto address = static_cast<std::size_t>(fraction >> (frac - lut.addr_bits()));
  const std::int64_t entry = lut.raw_entries()[address];
  const int scale = clamp_shift(shift + out.frac_bits - lut.value_format().frac_bits);
  return Fixed{scale_saturate(entry, scale, out), out};
}

std::vector<int> cordic_schedule(int iterations) {
  std::vector<int> schedule;
  schedule.reserve(static_cast<std::size_t>(std::max(iterations, 0)));
  int repeat = 4;
  for (int i = 1; static_cast<int>(schedule.size()) < iterations; ++i) {
    schedule.push_back(i);
    if (i == repeat && static_cast<int>(schedule.size()) < iterations) {
      schedule.push_back(i);
      repeat = 3 * repeat + 1;
    }
  }
  return schedule;
}

CordicConfig::CordicConfig(int iterations, QFormat word_format)
    : iterations_(iterations), word_format_(word_format) {
  if (iterations < 4) throw Error(ErrorKind::InvalidArgument, "CORDIC needs at least 4 iterations");
  if (!word_format.valid() || !word_format.is_signed || word_format.int_bits < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "CORDIC word format must be signed with an integer bit, got " + word_format.to_string());
  }
  schedule_ = cordic_schedule(iterations);
  double gain = 1.0;
  for (int i : schedule_) gain *= std::sqrt(1.0 - std::ldexp(1.0, -2 * i));
  gain_inverse_ = 1.0 / gain;
  gain_inverse_raw_ = from_real(gain_inverse_, word_format).raw;
  const int max_shift = schedule_.back();
  atanh_raw_.assign(static_cast<std::size_t>(max_shift) + 1, 0);
  for (int i = 1; i <= max_shift; ++i) {
    atanh_raw_[static_cast<std::size_t>(i)] = from_real(std::atanh(std::ldexp(1.0, -i)), word_format).raw;
  }
}

Fixed exp_cordic(const Fixed& x, const CordicConfig& cfg) {
  const QFormat w = cfg.word_format();
  const int in_frac = x.format.frac_bits + kConstFracBits;

  // u = round(x * log2 e), r = x - u*ln2
  const __int128 t = static_cast<__int128>(x.raw) * kLog2eQ62;
  const __int128 u = round_shift_right(t, in_frac);
  if (u > kShiftClamp) return Fixed{w.max_raw(), w};
  if (u < -kShiftClamp) return Fixed{0, w};
  const __int128 x_wide = static_cast<__int128>(x.raw) * (static_cast<__int128>(1) << kConstFracBits);
  const __int128 r_wide = x_wide - u * kLn2Q62 * (static_cast<__int128>(1) << x.format.frac_bits);
  const std::int64_t r = scale_saturate(r_wide, w.frac_bits - in_frac, w);

  // rotation mode: (X, Y) -> (cosh r, sinh r) starting from (1/K, 0)
  __int128 cx = cfg.gain_inverse_raw();
  __int128 cy = 0;
  __int128 z = r;
  for (int i : cfg.schedule()) {
    const __int128 dx = round_shift_right(cy, i);
    const __int128 dy = round_shift_right(cx, i);
    if (z >= 0) {
      cx = saturate(cx + dx, w);
      cy = saturate(cy + dy, w);
      z = saturate(z - cfg.atanh_raw(i), w);
    } else {
      cx = saturate(cx - dx, w);
      cy = saturate(cy - dy, w);
      z = saturate(z + cfg.atanh_raw(i), w);
    }
  }
  return Fixed{scale_saturate(cx + cy, clamp_shift(u), w), w};
}

}  // namespace rsm
