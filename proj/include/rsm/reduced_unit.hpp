#pragma once

// The reduced output stage: a comparator tree that returns the index of the
// largest logit instead of computing any exponential or division.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsm/fixed_point.hpp"
#include "rsm/variant.hpp"

namespace rsm {

enum class TieBreak { LowestIndex };

struct ComparatorTreeConfig {
  std::size_t k = 1;
  QFormat word_format;
  TieBreak tie_break = TieBreak::LowestIndex;

  std::size_t comparators() const { return k == 0 ? 0 : k - 1; }
  int depth() const;
};

struct Prediction {
  std::size_t class_index = 0;
  Fixed winner_value;
};

template <class T>
struct TreeOutcome {
  std::size_t index = 0;
  T value{};
  std::size_t comparisons = 0;
  int depth = 0;
};

// Tournament over the inputs in index order: level by level, neighbours
// (0,1), (2,3), ... meet in a comparator that passes the left operand unless
// the right one is strictly larger; an unpaired last entry moves up a level
// unchanged. The left operand always carries the lower indices, so the
// winner is the lowest index holding the maximum.
template <class T>
TreeOutcome<T> comparator_tree(std::span<const T> x) {
  struct Slot {
    T value;
    std::size_t index;
  };
  std::vector<Slot> level;
  level.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) level.push_back(Slot{x[i], i});
  TreeOutcome<T> out;
  while (level.size() > 1) {
    std::size_t next = 0;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      const Slot& left = level[i];
      const Slot& right = level[i + 1];
      level[next++] = right.value > left.value ? right : left;
      ++out.comparisons;
    }
    if (level.size() % 2 == 1) level[next++] = level.back();
    level.resize(next);
    ++out.depth;
  }
  out.index = level.front().index;
  out.value = level.front().value;
  return out;
}

// Throws Error(InvalidArgument) on a length mismatch or empty input and
// Error(FormatMismatch) when the logits are not in the configured word format.
Prediction argmax_comparator(const FixedVector& x, const ComparatorTreeConfig& cfg);
TreeOutcome<std::int64_t> evaluate_comparator_tree(const FixedVector& x, const ComparatorTreeConfig& cfg);

// Same tree on real logits.
std::size_t argmax_comparator_real(std::span<const double> x);

// Left-to-right scan, lowest index wins ties. Throws on empty input.
Prediction argmax_linear(const FixedVector& x);

struct CostRecord {
  std::uint64_t comparators = 0;
  std::uint64_t lut_bits = 0;
  std::uint64_t adders = 0;
  std::uint64_t multipliers = 0;
  std::uint64_t dividers = 0;
  std::uint64_t exp_evaluations = 0;

  friend bool operator==(const CostRecord&, const CostRecord&) = default;
};

struct CostParams {
  std::size_t k = 1;
  int lut_addr_bits = 8;
  QFormat lut_format{1, 14, true};
  int cordic_iterations = 16;
  QFormat cordic_format{7, 16, true};
};

CostRecord cost_summary(const ComparatorTreeConfig& cfg);
// Structural unit counts per output stage; no gate-level weighting.
CostRecord cost_of_unit(Variant variant, const CostParams& params);

}  // namespace rsm
