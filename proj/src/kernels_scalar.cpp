#include <algorithm>
#include <limits>

#include "rsm/kernels.hpp"

namespace rsm::kernels::scalar {
namespace {

std::size_t argmax_i64(std::span<const std::int64_t> x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

std::size_t argmax_f64(std::span<const double> x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

TopTwoI64 top2_i64(std::span<const std::int64_t> x) {
  TopTwoI64 r{0, x[0], INT64_MIN};
  for (std::size_t i = 1; i < x.size(); ++i) {
    const auto v = x[i];
    r.second = std::max(r.second, std::min(v, r.first));
    if (v > r.first) {
      r.first = v;
      r.index = i;
    }
  }
  return r;
}

TopTwoF64 top2_f64(std::span<const double> x) {
  TopTwoF64 r{0, x[0], -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 1; i < x.size(); ++i) {
    const auto v = x[i];
    r.second = std::max(r.second, std::min(v, r.first));
    if (v > r.first) {
      r.first = v;
      r.index = i;
    }
  }
  return r;
}

double max_f64(std::span<const double> x) {
  double m = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) m = x[i] > m ? x[i] : m;
  return m;
}

double sum_f64(std::span<const double> x) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) lane[i % 4] += x[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void div_f64(std::span<const double> in, double d, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] / d;
}

std::int64_t sat_sum_nonneg_i64(std::span<const std::int64_t> x, std::int64_t max_raw) {
  std::int64_t acc = 0;
  for (auto v : x) {
    const __int128 s = static_cast<__int128>(acc) + v;
    acc = s > max_raw ? max_raw : static_cast<std::int64_t>(s);
  }
  return acc;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{Isa::Scalar, "scalar", argmax_i64, argmax_f64, top2_i64, top2_f64,
                             max_f64,     sum_f64,  div_f64,    sat_sum_nonneg_i64};
  return t;
}

}  // namespace rsm::kernels::scalar
