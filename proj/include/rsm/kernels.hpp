#pragma once

// Data-parallel inner loops shared by the softmax units and the comparator.
// Each kernel has a scalar reference and an AVX2 variant; the variants are
// bit-identical to the reference (see tests/test_kernels.cpp), so the active
// table only changes speed, never results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rsm::kernels {

enum class Isa { Scalar, Avx2 };

struct TopTwoI64 {
  std::size_t index = 0;  // lowest index holding `first`
  std::int64_t first = 0;
  std::int64_t second = INT64_MIN;  // INT64_MIN when size() == 1
};

struct TopTwoF64 {
  std::size_t index = 0;
  double first = 0.0;
  double second = 0.0;  // -inf when size() == 1
};

struct KernelTable {
  Isa isa;
  std::string_view name;

  // Lowest index attaining the maximum. Input must be non-empty.
  std::size_t (*argmax_i64)(std::span<const std::int64_t>);
  std::size_t (*argmax_f64)(std::span<const double>);
  // Largest and second-largest values as a multiset (a repeated maximum gives
  // first == second).
  TopTwoI64 (*top2_i64)(std::span<const std::int64_t>);
  TopTwoF64 (*top2_f64)(std::span<const double>);
  double (*max_f64)(std::span<const double>);
  // Four-lane striped sum: lane i % 4 accumulates x[i] in order, then
  // (l0 + l1) + (l2 + l3).
  double (*sum_f64)(std::span<const double>);
  // out[i] = in[i] / d
  void (*div_f64)(std::span<const double> in, double d, std::span<double> out);
  // min(sum, max_raw) for non-negative inputs, which equals sequential
  // saturating accumulation.
  std::int64_t (*sat_sum_nonneg_i64)(std::span<const std::int64_t>, std::int64_t max_raw);
};

bool supported(Isa isa);
std::vector<Isa> available();
// Throws Error(InvalidArgument) when `isa` is not supported by this CPU/build.
const KernelTable& table(Isa isa);
// Best supported table, overridable with RSM_KERNELS=scalar|avx2.
const KernelTable& active();

namespace scalar {
const KernelTable& table();
}
namespace avx2 {
bool compiled();
const KernelTable& table();
}

}  // namespace rsm::kernels
