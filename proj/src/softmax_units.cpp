#include "rsm/softmax_units.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rsm/error.hpp"
#include "rsm/kernels.hpp"

namespace rsm {
namespace {

int ceil_log2(std::size_t k) {
  int bits = 0;
  while ((std::size_t{1} << bits) < k) ++bits;
  return bits;
}

// n / d rounded half-to-even, n >= 0, d > 0.
__int128 divide_round(__int128 n, __int128 d) {
  __int128 q = n / d;
  const __int128 r2 = 2 * (n % d);
  if (r2 > d || (r2 == d && (q & 1) != 0)) ++q;
  return q;
}

ProbVector normalize(std::vector<double> terms, const char* who) {
  const auto& k = kernels::active();
  const double sum = k.sum_f64(terms);
  if (!std::isfinite(sum) || sum <= 0.0) {
    throw Error(ErrorKind::Overflow, std::string(who) + ": exponential sum is not a positive finite number");
  }
  ProbVector out{std::vector<double>(terms.size())};
  k.div_f64(terms, sum, out.probs);
  return out;
}

}  // namespace

void validate_logits(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "logit vector is empty");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error(ErrorKind::InvalidArgument, "logit " + std::to_string(i) + " is not finite");
    }
  }
}

ProbVector softmax_exact(std::span<const double> x) {
  validate_logits(x);
  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    terms[i] = exp_reference(x[i]);
    if (!std::isfinite(terms[i])) {
      throw Error(ErrorKind::Overflow,
                  "softmax_exact: e^x overflows at index " + std::to_string(i) + "; use the stable variant");
    }
  }
  return normalize(std::move(terms), "softmax_exact");
}

ProbVector softmax_stable(std::span<const double> x) {
  validate_logits(x);
  const double m = kernels::active().max_f64(x);
  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) terms[i] = exp_reference(x[i] - m);
  return normalize(std::move(terms), "softmax_stable");
}

InverseScores inverse_softmax(std::span<const double> x) {
  validate_logits(x);
  InverseScores out{std::vector<double>(x.size()), false};
  for (std::size_t j = 0; j < x.size(); ++j) {
    double acc = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i != j) acc += exp_reference(x[i] - x[j]);
    }
    if (std::isinf(acc)) out.saturated = true;
    out.scores[j] = acc;
  }
  return out;
}

std::size_t predict_inverse(const InverseScores& scores) {
  const auto& s = scores.scores;
  if (s.empty()) throw Error(ErrorKind::InvalidArgument, "predict_inverse: no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < s[best]) best = i;
  }
  return best;
}

std::size_t predict(const ProbVector& p) {
  if (p.probs.empty()) throw Error(ErrorKind::InvalidArgument, "predict: empty probability vector");
  return kernels::active().argmax_f64(p.probs);
}

double cross_entropy(const ProbVector& p, std::size_t target) {
  if (target >= p.probs.size()) {
    throw Error(ErrorKind::InvalidArgument, "cross_entropy: target " + std::to_string(target) + " out of range");
  }
  const double pt = p.probs[target];
  if (pt <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(pt);
}

QFormat pseudo_softmax_accumulator(QFormat value_format, std::size_t k) {
  QFormat acc = value_format;
  acc.is_signed = true;
  acc.int_bits += ceil_log2(k);
  // never wider than a 64-bit word; saturation covers the rest
  acc.int_bits = std::min(acc.int_bits, 63 - acc.frac_bits);
  return acc;
}

PseudoSoftmaxOutput pseudo_softmax_base2(const FixedVector& x, const ExpLut& lut, QFormat out_format) {
  if (x.raw.empty()) throw Error(ErrorKind::InvalidArgument, "pseudo_softmax_base2: empty logit vector");
  if (!out_format.valid()) throw Error(ErrorKind::InvalidArgument, "pseudo_softmax_base2: invalid output format");
  const auto& kern = kernels::active();
  const std::size_t k = x.size();
  const Fixed m = x[kern.argmax_i64(x.raw)];

  PseudoSoftmaxOutput out;
  out.numerators.format = lut.value_format();
  out.numerators.raw.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.numerators.raw[j] = exp_base2(fx_sub(x[j], m), lut).raw;
  }

  const QFormat acc_format = pseudo_softmax_accumulator(lut.value_format(), k);
  out.denominator = Fixed{kern.sat_sum_nonneg_i64(out.numerators.raw, acc_format.max_raw()), acc_format};

  // numerator and denominator share frac bits, so the quotient only needs
  // the output scaling
  out.probs.format = out_format;
  out.probs.raw.resize(k);
  const __int128 den = out.denominator.raw;
  for (std::size_t j = 0; j < k; ++j) {
    const __int128 num = static_cast<__int128>(out.numerators.raw[j]) << out_format.frac_bits;
    out.probs.raw[j] = saturate(divide_round(num, den), out_format);
  }
  return out;
}

}  // namespace rsm
