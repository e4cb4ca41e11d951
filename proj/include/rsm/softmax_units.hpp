#pragma once

// Softmax-stage variants in real arithmetic (exact, max-subtracted, inverse)
// and the fixed-point base-2 pseudo-softmax, plus the cross-entropy metric.
// Ties resolve to the lowest index everywhere.

#include <cstddef>
#include <span>
#include <vector>

#include "rsm/exp_units.hpp"
#include "rsm/fixed_point.hpp"

namespace rsm {

struct ProbVector {
  std::vector<double> probs;
};

// s'(x_j) = 1 + sum_{i != j} e^(x_i - x_j). `saturated` is set when some term
// overflowed to +inf; the minimum is still meaningful.
struct InverseScores {
  std::vector<double> scores;
  bool saturated = false;
};

// Throws Error(InvalidArgument) for an empty vector or non-finite entries.
void validate_logits(std::span<const double> x);

// e^x_j / sum e^x_i without max subtraction. Throws Error(Overflow) when a
// term or the sum is not finite, which is the cue to use softmax_stable.
ProbVector softmax_exact(std::span<const double> x);

// e^(x_j - m) / sum e^(x_i - m), m = max x; every exponential is <= 1.
ProbVector softmax_stable(std::span<const double> x);

InverseScores inverse_softmax(std::span<const double> x);

// Lowest index of the minimum score.
std::size_t predict_inverse(const InverseScores& scores);

// Lowest index of the maximum probability.
std::size_t predict(const ProbVector& p);

// -ln p[target] for a one-hot target; +inf when p[target] == 0.
double cross_entropy(const ProbVector& p, std::size_t target);

struct PseudoSoftmaxOutput {
  FixedVector probs;
  FixedVector numerators;  // exp_base2(x_j - m) in the LUT value format
  Fixed denominator;       // saturating sum in the widened accumulator format
};

// Base-2 pseudo-softmax on fixed-point logits: numerators 2^((x_j - m) log2 e)
// from the LUT, saturating accumulation in a format widened by ceil(log2 k)
// integer bits, and a double-width division rounded into `out_format`.
PseudoSoftmaxOutput pseudo_softmax_base2(const FixedVector& x, const ExpLut& lut, QFormat out_format);

// Accumulator format used by pseudo_softmax_base2 for k terms.
QFormat pseudo_softmax_accumulator(QFormat value_format, std::size_t k);

}  // namespace rsm
