#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "rsm/error.hpp"
#include "rsm/reduced_unit.hpp"
#include "rsm/rng.hpp"
#include "rsm/softmax_units.hpp"

using namespace rsm;

namespace {

const QFormat kWord{7, 8, true};

Prediction run(const std::vector<double>& x, QFormat f = kWord) {
  return argmax_comparator(quantize(x, f), ComparatorTreeConfig{x.size(), f});
}

}  // namespace

TEST_CASE("comparator tree on the golden columns") {
  CHECK(run({-67.98, -33.07, -76.26, -92.96, -90.64, -10.83, -16.15, -89.70, -36.38, -60.84}).class_index == 5);
  CHECK(run({62.31, 87.20, 10.66, 83.53, 45.06, 73.87, 49.77, 66.38, 23.36, 95.52}).class_index == 9);
  CHECK(run({-0.95, -0.83, -0.69, 0.58, -0.55, 0.16, 0.23, 0.91, 0.07, 0.18}).class_index == 7);
  const auto p = run({-0.95, -0.83, -0.69, 0.58, -0.55, 0.16, 0.23, 0.91, 0.07, 0.18});
  CHECK(p.winner_value == from_real(0.91, kWord));
}

TEST_CASE("comparator tree ties and degenerate sizes") {
  CHECK(run({0.0, 0.0}).class_index == 0);
  CHECK(run({1.0, 3.0, 3.0, 2.0}).class_index == 1);
  CHECK(run({2.0, 1.0, 2.0}).class_index == 0);
  CHECK(run({5.0}).class_index == 0);
  CHECK(run({-1.0, -1.0, -1.0, -1.0, -1.0}).class_index == 0);
  CHECK(argmax_comparator_real(std::vector<double>{1.0, 2.0, 2.0}) == 1);
}

TEST_CASE("comparator tree argument checks") {
  CHECK_THROWS_AS(argmax_comparator(quantize(std::vector<double>{1.0, 2.0}, kWord), ComparatorTreeConfig{3, kWord}), Error);
  try {
    argmax_comparator(quantize(std::vector<double>{1.0, 2.0}, QFormat{3, 4, true}), ComparatorTreeConfig{2, kWord});
    FAIL("expected format mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FormatMismatch);
  }
  CHECK_THROWS_AS(argmax_comparator(FixedVector{kWord, {}}, ComparatorTreeConfig{0, kWord}), Error);
  CHECK_THROWS_AS(argmax_linear(FixedVector{kWord, {}}), Error);
}

TEST_CASE("comparator tree structure") {
  for (std::size_t k : {1, 2, 3, 4, 5, 7, 8, 9, 10, 100, 1000, 1024, 1025}) {
    std::vector<std::int64_t> x(k);
    std::iota(x.begin(), x.end(), 0);
    const auto out = comparator_tree<std::int64_t>(x);
    const ComparatorTreeConfig cfg{k, kWord};
    CHECK(out.index == k - 1);
    CHECK(out.comparisons == cfg.comparators());
    CHECK(out.depth == cfg.depth());
  }
  CHECK(ComparatorTreeConfig{1000, kWord}.depth() == 10);
  CHECK(ComparatorTreeConfig{1, kWord}.depth() == 0);
}

TEST_CASE("property: tree equals linear scan on exhaustive small words") {
  const QFormat tiny{1, 2, true};  // raw in [-8, 7]
  for (std::size_t k = 1; k <= 4; ++k) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 16;
    for (std::size_t code = 0; code < total; ++code) {
      FixedVector v{tiny, std::vector<std::int64_t>(k)};
      std::size_t c = code;
      for (std::size_t i = 0; i < k; ++i, c /= 16) v.raw[i] = static_cast<std::int64_t>(c % 16) - 8;
      const auto tree = argmax_comparator(v, ComparatorTreeConfig{k, tiny});
      const auto lin = argmax_linear(v);
      REQUIRE(tree.class_index == lin.class_index);
      REQUIRE(tree.winner_value == lin.winner_value);
    }
  }
}

TEST_CASE("property: permutation equivariance on distinct logits") {
  SplitMix64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t k = 2 + rng.next() % 40;
    std::vector<std::int64_t> raw(k);
    std::iota(raw.begin(), raw.end(), -static_cast<std::int64_t>(k) / 2);
    for (std::size_t i = k - 1; i > 0; --i) std::swap(raw[i], raw[rng.next() % (i + 1)]);
    const auto base = argmax_comparator(FixedVector{kWord, raw}, ComparatorTreeConfig{k, kWord});
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.next() % (i + 1)]);
    std::vector<std::int64_t> shuffled(k);
    for (std::size_t i = 0; i < k; ++i) shuffled[i] = raw[perm[i]];
    const auto moved = argmax_comparator(FixedVector{kWord, shuffled}, ComparatorTreeConfig{k, kWord});
    CHECK(perm[moved.class_index] == base.class_index);
  }
}

TEST_CASE("property: real tree agrees with the stable softmax") {
  SplitMix64 rng(12);
  for (int t = 0; t < 3000; ++t) {
    std::vector<double> x(1 + rng.next() % 100);
    for (auto& v : x) v = -100 + 200 * rng.uniform01();
    CHECK(argmax_comparator_real(x) == predict(softmax_stable(x)));
  }
}

TEST_CASE("cost model") {
  const auto r = cost_of_unit(Variant::Reduced, CostParams{1000});
  CHECK(r.comparators == 999);
  CHECK(r.adders == 0);
  CHECK(r.multipliers == 0);
  CHECK(r.dividers == 0);
  CHECK(r.exp_evaluations == 0);
  CHECK(r.lut_bits == 0);
  CHECK(cost_summary(ComparatorTreeConfig{1000, kWord}) == r);
  CHECK(cost_of_unit(Variant::Reduced, CostParams{1}).comparators == 0);

  const auto b = cost_of_unit(Variant::Base2, CostParams{10});
  CHECK(b.lut_bits == 256 * 16);
  CHECK(b.exp_evaluations == 10);
  CHECK(b.dividers == 10);

  const auto inv = cost_of_unit(Variant::Inverse, CostParams{10});
  CHECK(inv.exp_evaluations == 90);
  CHECK(inv.dividers == 0);

  for (std::size_t k : {2, 10, 1000}) {
    const auto reduced = cost_of_unit(Variant::Reduced, CostParams{k});
    for (Variant v : kAllVariants) {
      if (v == Variant::Reduced) continue;
      const auto c = cost_of_unit(v, CostParams{k});
      CHECK(c.exp_evaluations > 0);
      CHECK(c.exp_evaluations > reduced.exp_evaluations);
      CHECK(c.comparators >= reduced.comparators);
    }
  }
}
