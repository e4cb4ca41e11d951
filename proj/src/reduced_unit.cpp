#include "rsm/reduced_unit.hpp"

#include <set>
#include <string>

#include "rsm/error.hpp"
#include "rsm/exp_units.hpp"
#include "rsm/kernels.hpp"

namespace rsm {

int ComparatorTreeConfig::depth() const {
  int d = 0;
  while ((std::size_t{1} << d) < k) ++d;
  return d;
}

TreeOutcome<std::int64_t> evaluate_comparator_tree(const FixedVector& x, const ComparatorTreeConfig& cfg) {
  if (cfg.k == 0) throw Error(ErrorKind::InvalidArgument, "comparator tree needs k >= 1");
  if (x.size() != cfg.k) {
    throw Error(ErrorKind::InvalidArgument, "comparator tree configured for k=" + std::to_string(cfg.k) +
                                                " but got " + std::to_string(x.size()) + " logits");
  }
  if (x.format != cfg.word_format) {
    throw Error(ErrorKind::FormatMismatch, "comparator tree word format is " + cfg.word_format.to_string() +
                                               ", logits are " + x.format.to_string());
  }
  return comparator_tree<std::int64_t>(x.raw);
}

Prediction argmax_comparator(const FixedVector& x, const ComparatorTreeConfig& cfg) {
  const auto outcome = evaluate_comparator_tree(x, cfg);
  return Prediction{outcome.index, Fixed{outcome.value, x.format}};
}

std::size_t argmax_comparator_real(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "argmax_comparator_real: empty input");
  return comparator_tree<double>(x).index;
}

Prediction argmax_linear(const FixedVector& x) {
  if (x.raw.empty()) throw Error(ErrorKind::InvalidArgument, "argmax_linear: empty input");
  const std::size_t i = kernels::active().argmax_i64(x.raw);
  return Prediction{i, x[i]};
}

CostRecord cost_summary(const ComparatorTreeConfig& cfg) {
  return cost_of_unit(Variant::Reduced, CostParams{.k = cfg.k});
}

CostRecord cost_of_unit(Variant variant, const CostParams& p) {
  const std::uint64_t k = p.k;
  const std::uint64_t pick = k == 0 ? 0 : k - 1;
  CostRecord c;
  c.comparators = pick;
  switch (variant) {
    case Variant::Reduced:
      break;
    case Variant::Exact:
      c.adders = pick;
      c.dividers = k;
      c.exp_evaluations = k;
      break;
    case Variant::Stable:
      // k max-subtractions plus the k-1 term sum
      c.adders = pick + k;
      c.dividers = k;
      c.exp_evaluations = k;
      break;
    case Variant::Base2:
      c.lut_bits = (std::uint64_t{1} << p.lut_addr_bits) * static_cast<std::uint64_t>(p.lut_format.width());
      c.adders = pick + k;
      c.multipliers = k;  // x * log2 e
      c.dividers = k;
      c.exp_evaluations = k;
      break;
    case Variant::Inverse:
      // per class: k-1 differences and k-1 accumulations onto the leading 1
      c.adders = 2 * k * pick;
      c.exp_evaluations = k * pick;
      break;
    case Variant::CordicExp: {
      const auto schedule = cordic_schedule(p.cordic_iterations);
      const std::set<int> distinct(schedule.begin(), schedule.end());
      c.lut_bits = distinct.size() * static_cast<std::uint64_t>(p.cordic_format.width());
      // stable datapath, plus X/Y/Z updates per micro-rotation and X + Y
      c.adders = pick + k + k * (3 * schedule.size() + 1);
      c.multipliers = 2 * k;  // u = x log2 e, r = x - u ln 2
      c.dividers = k;
      c.exp_evaluations = k;
      break;
    }
  }
  return c;
}

}  // namespace rsm
