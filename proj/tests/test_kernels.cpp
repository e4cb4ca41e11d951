#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "rsm/kernels.hpp"
#include "rsm/rng.hpp"

using namespace rsm;
using kernels::Isa;

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

std::vector<std::int64_t> random_i64(SplitMix64& rng, std::size_t n, std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> x(n);
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  for (auto& v : x) {
    const std::uint64_t offset = span == 0 ? rng.next() : rng.next() % span;
    v = static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + offset);
  }
  return x;
}

std::vector<double> random_f64(SplitMix64& rng, std::size_t n, double lo, double hi) {
  std::vector<double> x(n);
  for (auto& v : x) v = lo + (hi - lo) * rng.uniform01();
  return x;
}

}  // namespace

TEST_CASE("scalar kernels on small cases") {
  const auto& k = kernels::scalar::table();
  const std::vector<std::int64_t> a{1, 5, 5, -2};
  CHECK(k.argmax_i64(a) == 1);
  const auto t = k.top2_i64(a);
  CHECK(t.index == 1);
  CHECK(t.first == 5);
  CHECK(t.second == 5);
  const std::vector<std::int64_t> single{9};
  CHECK(k.top2_i64(single).second == INT64_MIN);
  const std::vector<double> d{0.5, -1.0, 3.0, 2.0, 3.0};
  CHECK(k.argmax_f64(d) == 2);
  CHECK(k.top2_f64(d).second == 3.0);
  CHECK(k.max_f64(d) == 3.0);
  CHECK(k.sum_f64(d) == 7.5);
  std::vector<double> out(d.size());
  k.div_f64(d, 2.0, out);
  CHECK(out[2] == 1.5);
  const std::vector<std::int64_t> pos{5, 7, 9};
  CHECK(k.sat_sum_nonneg_i64(pos, 100) == 21);
  CHECK(k.sat_sum_nonneg_i64(pos, 15) == 15);
}

TEST_CASE("active table is supported") {
  const auto& t = kernels::active();
  CHECK(kernels::supported(t.isa));
  CHECK(kernels::available().front() == Isa::Scalar);
}

TEST_CASE("every available ISA is bit-identical to the scalar reference") {
  const auto& ref = kernels::scalar::table();
  SplitMix64 rng(2024);
  const std::size_t sizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 100, 1000, 1001};
  for (Isa isa : kernels::available()) {
    const auto& k = kernels::table(isa);
    CAPTURE(k.name);
    for (std::size_t n : sizes) {
      CAPTURE(n);
      for (int rep = 0; rep < 50; ++rep) {
        // narrow ranges force ties at the maximum
        const std::int64_t hi = rep % 2 == 0 ? 3 : INT64_MAX;
        const std::int64_t lo = rep % 2 == 0 ? -3 : INT64_MIN;
        const auto xi = random_i64(rng, n, lo, hi);
        CHECK(k.argmax_i64(xi) == ref.argmax_i64(xi));
        const auto ti = k.top2_i64(xi);
        const auto ri = ref.top2_i64(xi);
        CHECK(ti.index == ri.index);
        CHECK(ti.first == ri.first);
        CHECK(ti.second == ri.second);

        auto xd = random_f64(rng, n, -100.0, 100.0);
        if (rep % 3 == 0) {
          for (auto& v : xd) v = std::round(v / 40.0);
        }
        CHECK(k.argmax_f64(xd) == ref.argmax_f64(xd));
        const auto td = k.top2_f64(xd);
        const auto rd = ref.top2_f64(xd);
        CHECK(td.index == rd.index);
        CHECK(td.first == rd.first);
        CHECK(td.second == rd.second);
        CHECK(bits(k.max_f64(xd)) == bits(ref.max_f64(xd)));
        CHECK(bits(k.sum_f64(xd)) == bits(ref.sum_f64(xd)));

        std::vector<double> a(n), b(n);
        const double d = 0.1 + rng.uniform01() * 10;
        k.div_f64(xd, d, a);
        ref.div_f64(xd, d, b);
        for (std::size_t i = 0; i < n; ++i) CHECK(bits(a[i]) == bits(b[i]));

        const std::int64_t limit = rep % 2 == 0 ? 1 << 20 : INT64_MAX;
        const auto xp = random_i64(rng, n, 0, rep % 2 == 0 ? 1 << 16 : INT64_MAX / 4);
        CHECK(k.sat_sum_nonneg_i64(xp, limit) == ref.sat_sum_nonneg_i64(xp, limit));
      }
    }
  }
}

TEST_CASE("saturating sum equals sequential saturation") {
  SplitMix64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = random_i64(rng, 1 + rng.next() % 300, 0, 1000);
    const std::int64_t limit = static_cast<std::int64_t>(rng.next() % 200000);
    std::int64_t acc = 0;
    for (auto v : x) acc = std::min(acc + v, limit);
    for (Isa isa : kernels::available()) CHECK(kernels::table(isa).sat_sum_nonneg_i64(x, limit) == acc);
  }
}

TEST_CASE("striped sum follows the documented lane order") {
  const std::vector<double> x{1e16, 1.0, -1e16, 1.0, 1.0};
  // lanes: 1e16 + 1.0, 1.0, -1e16, 1.0 -> (1e16 + 1 + 1) + (-1e16 + 1)
  const double expected = ((1e16 + 1.0) + 1.0) + (-1e16 + 1.0);
  for (Isa isa : kernels::available()) CHECK(kernels::table(isa).sum_f64(x) == expected);
}
