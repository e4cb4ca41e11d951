#pragma once

// Experiment engine: deterministic input generation, cross-variant
// agreement/error measurement, golden-table reproduction and monotone curve
// data.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsm/exp_units.hpp"
#include "rsm/fixed_point.hpp"
#include "rsm/reduced_unit.hpp"
#include "rsm/softmax_units.hpp"
#include "rsm/text.hpp"
#include "rsm/variant.hpp"

namespace rsm {

inline constexpr std::uint64_t kDefaultSeed = 20210601;
inline constexpr const char* kReportSchema = "rsm.experiment-report/1";

// Default seed, or RSM_SEED when set. Throws Error(Usage) on a malformed value.
std::uint64_t default_seed();

struct InputSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t k = 10;
  std::size_t trials = 1;
  std::uint64_t seed = kDefaultSeed;

  // Throws Error(InvalidArgument) unless lo < hi (both finite), k >= 1, trials >= 1.
  void validate() const;
};

using LogitVector = std::vector<double>;

// Trial t draws k values from SplitMix64::substream(seed, t), mapped to
// lo + (hi - lo) * u and kept strictly below hi.
std::vector<LogitVector> gen_uniform(const InputSpec& spec);
LogitVector gen_trial(const InputSpec& spec, std::size_t trial);

// Parameters of one output-stage model.
struct UnitConfig {
  Variant variant = Variant::Stable;
  QFormat word_format{7, 8, true};  // logit word for base2 and reduced
  int lut_addr_bits = 8;
  QFormat lut_format{1, 14, true};
  QFormat prob_format{1, 30, true};
  int cordic_iterations = 16;
  QFormat cordic_format{7, 16, true};
};

struct UnitOutput {
  std::size_t class_index = 0;
  std::optional<std::vector<double>> probs;
};

class SoftmaxUnit {
 public:
  explicit SoftmaxUnit(UnitConfig cfg);

  const UnitConfig& config() const { return cfg_; }
  // Variants that see the logits through the fixed-point word.
  bool quantized() const;
  bool exp_only() const { return cfg_.variant == Variant::CordicExp; }

  // Class and (when the variant has them) probabilities. Throws Error(Usage)
  // for the exp-only CORDIC variant and Error(Overflow) when exact overflows.
  UnitOutput evaluate(std::span<const double> logits) const;
  // CORDIC e^(x_j - max x) on the word format, as reals.
  std::vector<double> cordic_exponentials(std::span<const double> logits) const;
  CostRecord cost(std::size_t k) const;

 private:
  UnitConfig cfg_;
  std::optional<ExpLut> lut_;
  std::optional<CordicConfig> cordic_;
};

struct ExperimentConfig {
  std::vector<Variant> variants{Variant::Reduced, Variant::Stable};
  Variant oracle = Variant::Stable;
  UnitConfig unit;  // formats shared by every variant; `variant` is ignored
  unsigned threads = 1;
};

struct VariantStats {
  Variant variant = Variant::Stable;
  std::size_t trials = 0;
  std::size_t scored = 0;
  std::size_t filtered = 0;   // top-two gap within one word ulp
  std::size_t overflows = 0;  // exact variant overflowed
  std::size_t agreements = 0;
  std::optional<double> agreement_rate;
  std::optional<double> max_abs_prob_error;
  std::optional<double> mean_abs_prob_error;
  std::optional<double> max_abs_exp_error;  // cordic-exp only
  std::optional<double> mean_abs_exp_error;
};

struct RangeReport {
  InputSpec spec;
  std::vector<VariantStats> variants;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RangeReport> ranges;
  std::vector<std::pair<Variant, CostRecord>> costs;  // for the largest k

  const VariantStats& stats(std::size_t range, Variant v) const;
  nlohmann::ordered_json to_json() const;
};

// Throws Error(InvalidArgument) when the oracle is not among the variants or
// cannot produce a class (cordic-exp).
ExperimentReport run_agreement(const InputSpec& spec, const ExperimentConfig& cfg);
ExperimentReport run_agreement(std::span<const InputSpec> specs, const ExperimentConfig& cfg);

// The three sampling ranges of the golden table: [-100,0], [0,100], [-1,1],
// seeded seed, seed + 1, seed + 2.
std::array<InputSpec, 3> table1_ranges(std::size_t k, std::size_t trials, std::uint64_t seed);

nlohmann::ordered_json to_json(const CostRecord& c);

struct Table1Row {
  std::string input_text;  // as printed
  double input = 0.0;
  double printed_exp = 0.0;
  double printed_softmax = 0.0;
  double exp = 0.0;
  double softmax = 0.0;
  double exp_rel_error = 0.0;
  double softmax_rel_error = 0.0;
  bool exp_ok = false;
  bool softmax_ok = false;
};

struct Table1Column {
  std::string label;
  std::vector<Table1Row> rows;
  std::size_t printed_winner = 0;  // bold row
  std::size_t reduced_class = 0;   // comparator tree on the quantized inputs
  std::size_t softmax_class = 0;
};

struct Table1Result {
  std::array<Table1Column, 3> columns;
  double tolerance = 5e-3;

  std::size_t rows_within_tolerance() const;
  bool all_within_tolerance() const;
  bool winners_match() const;
  void write_text(std::ostream& out) const;
};

// Recomputes e^x and the softmax of each printed input column and compares
// against the printed values at relative tolerance `tolerance`.
Table1Result reproduce_table1(double tolerance = 5e-3, QFormat word_format = QFormat{7, 8, true});

struct CurveRow {
  double x = 0.0;
  double exp_x = 0.0;
  double softmax_x = 0.0;
};

// spec.k samples of trial 0, sorted by x, with e^x and the stable softmax of
// the whole sample.
std::vector<CurveRow> emit_monotonicity_data(const InputSpec& spec);
// Header "x,exp_x,softmax_x", shortest round-trip decimals.
void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows);

// One vector per line, k comma-separated reals. Throws Error(InputFormat)
// naming the line on malformed rows or inconsistent k.
std::vector<LogitVector> read_logits_csv(std::istream& in);
void write_logits_csv(std::ostream& out, std::span<const LogitVector> vectors);

}  // namespace rsm
