#include "rsm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "rsm/error.hpp"
#include "rsm/kernels.hpp"
#include "rsm/rng.hpp"

namespace rsm {
namespace {

struct TrialRecord {
  bool scored = false;
  bool filtered = false;
  bool overflow = false;
  bool agree = false;
  bool has_prob_error = false;
  double max_prob_error = 0.0;
  double sum_prob_error = 0.0;
  std::size_t prob_terms = 0;
  double max_exp_error = 0.0;
  double sum_exp_error = 0.0;
  std::size_t exp_terms = 0;
};

std::optional<UnitOutput> try_evaluate(const SoftmaxUnit& unit, std::span<const double> x) {
  try {
    return unit.evaluate(x);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Overflow) return std::nullopt;
    throw;
  }
}

std::vector<TrialRecord> score_trial(std::span<const double> x, const SoftmaxUnit& oracle,
                                     std::span<const SoftmaxUnit> units, double word_ulp) {
  std::vector<TrialRecord> out(units.size());
  const auto reference = try_evaluate(oracle, x);
  const auto top = kernels::active().top2_f64(x);
  const bool gap_ok = x.size() == 1 || top.first - top.second > word_ulp;

  for (std::size_t v = 0; v < units.size(); ++v) {
    const SoftmaxUnit& unit = units[v];
    TrialRecord& rec = out[v];
    if (unit.exp_only()) {
      const auto approx = unit.cordic_exponentials(x);
      const QFormat word = unit.config().cordic_format;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double err = std::fabs(approx[j] - exp_reference(from_real(x[j] - top.first, word).to_real()));
        rec.max_exp_error = std::max(rec.max_exp_error, err);
        rec.sum_exp_error += err;
        ++rec.exp_terms;
      }
      continue;
    }
    if (!reference) {
      rec.overflow = true;
      continue;
    }
    if (unit.quantized() && !gap_ok) {
      rec.filtered = true;
      continue;
    }
    const auto result = try_evaluate(unit, x);
    if (!result) {
      rec.overflow = true;
      continue;
    }
    rec.scored = true;
    rec.agree = result->class_index == reference->class_index;
    if (result->probs && reference->probs) {
      rec.has_prob_error = true;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double err = std::fabs((*result->probs)[j] - (*reference->probs)[j]);
        rec.max_prob_error = std::max(rec.max_prob_error, err);
        rec.sum_prob_error += err;
        ++rec.prob_terms;
      }
    }
  }
  return out;
}

RangeReport run_range(const InputSpec& spec, const ExperimentConfig& cfg, const SoftmaxUnit& oracle,
                      std::span<const SoftmaxUnit> units) {
  spec.validate();
  const double word_ulp = cfg.unit.word_format.resolution();
  std::vector<std::vector<TrialRecord>> records(spec.trials);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto x = gen_trial(spec, t);
      records[t] = score_trial(x, oracle, units, word_ulp);
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, spec.trials);
  if (threads == 1) {
    work(0, spec.trials);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::jthread> pool;
    const std::size_t chunk = (spec.trials + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(spec.trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // aggregate in trial order so the result does not depend on scheduling
  RangeReport report{spec, {}};
  for (std::size_t v = 0; v < units.size(); ++v) {
    VariantStats s;
    s.variant = units[v].config().variant;
    s.trials = spec.trials;
    double max_p = 0.0, sum_p = 0.0, max_e = 0.0, sum_e = 0.0;
    std::size_t n_p = 0, n_e = 0;
    bool any_p = false;
    for (const auto& trial : records) {
      const TrialRecord& r = trial[v];
      s.scored += r.scored;
      s.filtered += r.filtered;
      s.overflows += r.overflow;
      s.agreements += r.agree;
      if (r.has_prob_error) {
        any_p = true;
        max_p = std::max(max_p, r.max_prob_error);
        sum_p += r.sum_prob_error;
        n_p += r.prob_terms;
      }
      max_e = std::max(max_e, r.max_exp_error);
      sum_e += r.sum_exp_error;
      n_e += r.exp_terms;
    }
    if (s.scored > 0) s.agreement_rate = static_cast<double>(s.agreements) / static_cast<double>(s.scored);
    if (any_p && n_p > 0) {
      s.max_abs_prob_error = max_p;
      s.mean_abs_prob_error = sum_p / static_cast<double>(n_p);
    }
    if (n_e > 0) {
      s.max_abs_exp_error = max_e;
      s.mean_abs_exp_error = sum_e / static_cast<double>(n_e);
    }
    report.variants.push_back(s);
  }
  return report;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct PrintedRow {
  const char* input;
  const char* exp;
  const char* softmax;
};

struct PrintedColumn {
  const char* label;
  std::size_t bold_row;
  std::array<PrintedRow, 10> rows;
};

// The golden table exactly as printed: inputs, e^x and s(x).
constexpr std::array<PrintedColumn, 3> kTable1 = {{
    {"All Negative (-100, 0)",
     5,
     {{{"-67.98", "2.98e-30", "1.51e-25"},
       {"-33.07", "4.33e-15", "2.19e-10"},
       {"-76.26", "7.54e-34", "3.81e-29"},
       {"-92.96", "4.22e-41", "2.13e-36"},
       {"-90.64", "4.30e-40", "2.17e-35"},
       {"-10.83", "1.96e-05", "9.95e-01"},
       {"-16.15", "9.67e-08", "4.89e-03"},
       {"-89.70", "1.09e-39", "5.55e-35"},
       {"-36.38", "1.57e-16", "7.97e-12"},
       {"-60.84", "3.75e-27", "1.89e-22"}}}},
    {"All Positive (0, 100)",
     9,
     {{{"62.31", "1.16e27", "3.80e-15"},
       {"87.20", "7.44e37", "2.44e-04"},
       {"10.66", "4.27e04", "1.41e-37"},
       {"83.53", "1.90e36", "6.24e-06"},
       {"45.06", "3.74e19", "1.22e-22"},
       {"73.87", "1.20e32", "3.95e-10"},
       {"49.77", "4.14e21", "1.35e-20"},
       {"66.38", "6.89e28", "2.22e-13"},
       {"23.36", "1.40e10", "4.61e-32"},
       {"95.52", "3.05e41", "9.97e-01"}}}},
    {"Random Inputs (-1, 1)",
     7,
     {{{"-0.95", "0.38", "0.03"},
       {"-0.83", "0.43", "0.03"},
       {"-0.69", "0.49", "0.04"},
       {"0.58", "1.79", "0.16"},
       {"-0.55", "0.57", "0.05"},
       {"0.16", "1.18", "0.10"},
       {"0.23", "1.26", "0.11"},
       {"0.91", "2.49", "0.22"},
       {"0.07", "1.07", "0.09"},
       {"0.18", "1.20", "0.11"}}}},
}};

double parse_printed(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InputFormat, "bad golden value " + std::string(text));
  }
  return v;
}

}  // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv("RSM_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::Usage, "RSM_SEED must be a decimal unsigned 64-bit integer, got '" + std::string(text) + "'");
  }
  return seed;
}

void InputSpec::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || !std::isfinite(hi - lo)) {
    throw Error(ErrorKind::InvalidArgument, "input range needs finite lo < hi");
  }
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
}

LogitVector gen_trial(const InputSpec& spec, std::size_t trial) {
  SplitMix64 rng(SplitMix64::substream(spec.seed, trial));
  LogitVector x(spec.k);
  const double width = spec.hi - spec.lo;
  for (auto& v : x) {
    v = spec.lo + width * rng.uniform01();
    if (v >= spec.hi) v = std::nextafter(spec.hi, spec.lo);
    if (v < spec.lo) v = spec.lo;
  }
  return x;
}

std::vector<LogitVector> gen_uniform(const InputSpec& spec) {
  spec.validate();
  std::vector<LogitVector> out;
  out.reserve(spec.trials);
  for (std::size_t t = 0; t < spec.trials; ++t) out.push_back(gen_trial(spec, t));
  return out;
}

SoftmaxUnit::SoftmaxUnit(UnitConfig cfg) : cfg_(cfg) {
  if (cfg_.variant == Variant::Base2) lut_ = build_lut(cfg_.lut_addr_bits, cfg_.lut_format);
  if (cfg_.variant == Variant::CordicExp) cordic_.emplace(cfg_.cordic_iterations, cfg_.cordic_format);
  if (!cfg_.word_format.valid() || !cfg_.prob_format.valid()) {
    throw Error(ErrorKind::InvalidArgument, "invalid word or probability format");
  }
}

bool SoftmaxUnit::quantized() const {
  return cfg_.variant == Variant::Base2 || cfg_.variant == Variant::Reduced || cfg_.variant == Variant::CordicExp;
}

UnitOutput SoftmaxUnit::evaluate(std::span<const double> logits) const {
  validate_logits(logits);
  switch (cfg_.variant) {
    case Variant::Exact: {
      auto p = softmax_exact(logits);
      const auto c = predict(p);
      return UnitOutput{c, std::move(p.probs)};
    }
    case Variant::Stable: {
      auto p = softmax_stable(logits);
      const auto c = predict(p);
      return UnitOutput{c, std::move(p.probs)};
    }
    case Variant::Inverse: {
      const auto s = inverse_softmax(logits);
      std::vector<double> probs(s.scores.size());
      for (std::size_t j = 0; j < probs.size(); ++j) probs[j] = 1.0 / s.scores[j];
      return UnitOutput{predict_inverse(s), std::move(probs)};
    }
    case Variant::Base2: {
      const auto q = quantize(logits, cfg_.word_format);
      const auto out = pseudo_softmax_base2(q, *lut_, cfg_.prob_format);
      return UnitOutput{kernels::active().argmax_i64(out.probs.raw), to_real(out.probs)};
    }
    case Variant::Reduced: {
      const auto q = quantize(logits, cfg_.word_format);
      const auto p = argmax_comparator(q, ComparatorTreeConfig{q.size(), cfg_.word_format});
      return UnitOutput{p.class_index, std::nullopt};
    }
    case Variant::CordicExp:
      break;
  }
  throw Error(ErrorKind::Usage, "cordic-exp is an exponential unit only and makes no class prediction");
}

std::vector<double> SoftmaxUnit::cordic_exponentials(std::span<const double> logits) const {
  validate_logits(logits);
  const CordicConfig cfg = cordic_ ? *cordic_ : CordicConfig(cfg_.cordic_iterations, cfg_.cordic_format);
  const double m = kernels::active().max_f64(logits);
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = exp_cordic(from_real(logits[j] - m, cfg.word_format()), cfg).to_real();
  }
  return out;
}

CostRecord SoftmaxUnit::cost(std::size_t k) const {
  return cost_of_unit(cfg_.variant, CostParams{k, cfg_.lut_addr_bits, cfg_.lut_format, cfg_.cordic_iterations,
                                               cfg_.cordic_format});
}

const VariantStats& ExperimentReport::stats(std::size_t range, Variant v) const {
  for (const auto& s : ranges.at(range).variants) {
    if (s.variant == v) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "variant not in report");
}

ExperimentReport run_agreement(const InputSpec& spec, const ExperimentConfig& cfg) {
  return run_agreement(std::span<const InputSpec>(&spec, 1), cfg);
}

ExperimentReport run_agreement(std::span<const InputSpec> specs, const ExperimentConfig& cfg) {
  if (std::find(cfg.variants.begin(), cfg.variants.end(), cfg.oracle) == cfg.variants.end()) {
    throw Error(ErrorKind::InvalidArgument, "oracle variant must be one of the compared variants");
  }
  if (cfg.oracle == Variant::CordicExp) {
    throw Error(ErrorKind::InvalidArgument, "cordic-exp makes no class prediction and cannot be the oracle");
  }
  if (specs.empty()) throw Error(ErrorKind::InvalidArgument, "no input ranges");

  auto unit_for = [&](Variant v) {
    UnitConfig u = cfg.unit;
    u.variant = v;
    return SoftmaxUnit(u);
  };
  const SoftmaxUnit oracle = unit_for(cfg.oracle);
  std::vector<SoftmaxUnit> units;
  for (Variant v : cfg.variants) units.push_back(unit_for(v));

  ExperimentReport report;
  report.config = cfg;
  std::size_t max_k = 0;
  for (const auto& spec : specs) {
    report.ranges.push_back(run_range(spec, cfg, oracle, units));
    max_k = std::max(max_k, spec.k);
  }
  for (const auto& unit : units) report.costs.emplace_back(unit.config().variant, unit.cost(max_k));
  return report;
}

std::array<InputSpec, 3> table1_ranges(std::size_t k, std::size_t trials, std::uint64_t seed) {
  // distinct seeds: with a shared seed the first two ranges would be the same
  // vectors shifted by 100
  return {InputSpec{-100.0, 0.0, k, trials, seed}, InputSpec{0.0, 100.0, k, trials, seed + 1},
          InputSpec{-1.0, 1.0, k, trials, seed + 2}};
}

nlohmann::ordered_json to_json(const CostRecord& c) {
  nlohmann::ordered_json j;
  j["comparators"] = c.comparators;
  j["lut_bits"] = c.lut_bits;
  j["adders"] = c.adders;
  j["multipliers"] = c.multipliers;
  j["dividers"] = c.dividers;
  j["exp_evaluations"] = c.exp_evaluations;
  return j;
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  auto& c = j["config"];
  c["variants"] = nlohmann::ordered_json::array();
  for (Variant v : config.variants) c["variants"].push_back(variant_name(v));
  c["oracle"] = variant_name(config.oracle);
  c["word_format"] = config.unit.word_format.to_string();
  c["lut_addr_bits"] = config.unit.lut_addr_bits;
  c["lut_format"] = config.unit.lut_format.to_string();
  c["prob_format"] = config.unit.prob_format.to_string();
  c["cordic_iterations"] = config.unit.cordic_iterations;
  c["cordic_format"] = config.unit.cordic_format.to_string();

  j["ranges"] = nlohmann::ordered_json::array();
  for (const auto& r : ranges) {
    nlohmann::ordered_json jr;
    jr["lo"] = r.spec.lo;
    jr["hi"] = r.spec.hi;
    jr["k"] = r.spec.k;
    jr["trials"] = r.spec.trials;
    jr["seed"] = r.spec.seed;
    jr["variants"] = nlohmann::ordered_json::array();
    for (const auto& s : r.variants) {
      nlohmann::ordered_json jv;
      jv["name"] = variant_name(s.variant);
      jv["scored"] = s.scored;
      jv["filtered"] = s.filtered;
      jv["overflows"] = s.overflows;
      jv["agreements"] = s.agreements;
      jv["agreement_rate"] = optional_json(s.agreement_rate);
      jv["max_abs_prob_error"] = optional_json(s.max_abs_prob_error);
      jv["mean_abs_prob_error"] = optional_json(s.mean_abs_prob_error);
      jv["max_abs_exp_error"] = optional_json(s.max_abs_exp_error);
      jv["mean_abs_exp_error"] = optional_json(s.mean_abs_exp_error);
      jr["variants"].push_back(std::move(jv));
    }
    j["ranges"].push_back(std::move(jr));
  }

  std::size_t max_k = 0;
  for (const auto& r : ranges) max_k = std::max(max_k, r.spec.k);
  j["costs"]["k"] = max_k;
  j["costs"]["units"] = nlohmann::ordered_json::array();
  for (const auto& [v, record] : costs) {
    nlohmann::ordered_json jc;
    jc["variant"] = variant_name(v);
    jc.update(rsm::to_json(record));
    j["costs"]["units"].push_back(std::move(jc));
  }
  return j;
}

std::size_t Table1Result::rows_within_tolerance() const {
  std::size_t n = 0;
  for (const auto& c : columns) {
    for (const auto& r : c.rows) n += r.exp_ok && r.softmax_ok;
  }
  return n;
}

bool Table1Result::all_within_tolerance() const { return rows_within_tolerance() == 30; }

bool Table1Result::winners_match() const {
  return std::all_of(columns.begin(), columns.end(), [](const Table1Column& c) {
    return c.reduced_class == c.printed_winner && c.softmax_class == c.printed_winner;
  });
}

void Table1Result::write_text(std::ostream& out) const {
  const auto flags = out.flags();
  for (const auto& c : columns) {
    out << c.label << "\n";
    out << "  input      e^x        printed    rel_err    s(x)       printed    rel_err\n";
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
      const auto& r = c.rows[i];
      out << (i == c.printed_winner ? "* " : "  ") << std::left << std::setw(9) << r.input_text << std::scientific
          << std::setprecision(3) << "  " << std::setw(9) << r.exp << "  " << std::setw(9) << r.printed_exp << "  "
          << std::setprecision(2) << std::setw(8) << r.exp_rel_error << (r.exp_ok ? " " : "!") << "  "
          << std::setprecision(3) << std::setw(9) << r.softmax << "  " << std::setw(9) << r.printed_softmax << "  "
          << std::setprecision(2) << std::setw(8) << r.softmax_rel_error << (r.softmax_ok ? " " : "!") << "\n";
      out.flags(flags);
    }
    out << "  bold row " << c.printed_winner << ", reduced unit picks " << c.reduced_class << ", softmax picks "
        << c.softmax_class << "\n\n";
  }
  out << "rows within " << tolerance << " relative: " << rows_within_tolerance() << "/30\n";
  out << "bold rows match reduced unit: " << (winners_match() ? "yes" : "no") << "\n";
  out.flags(flags);
}

Table1Result reproduce_table1(double tolerance, QFormat word_format) {
  Table1Result result;
  result.tolerance = tolerance;
  for (std::size_t c = 0; c < kTable1.size(); ++c) {
    const auto& printed = kTable1[c];
    Table1Column& col = result.columns[c];
    col.label = printed.label;
    col.printed_winner = printed.bold_row;
    std::vector<double> x;
    for (const auto& row : printed.rows) x.push_back(parse_printed(row.input));
    const auto s = softmax_stable(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      Table1Row r;
      r.input_text = printed.rows[i].input;
      r.input = x[i];
      r.printed_exp = parse_printed(printed.rows[i].exp);
      r.printed_softmax = parse_printed(printed.rows[i].softmax);
      r.exp = exp_reference(x[i]);
      r.softmax = s.probs[i];
      r.exp_rel_error = std::fabs(r.exp - r.printed_exp) / std::fabs(r.printed_exp);
      r.softmax_rel_error = std::fabs(r.softmax - r.printed_softmax) / std::fabs(r.printed_softmax);
      r.exp_ok = r.exp_rel_error <= tolerance;
      r.softmax_ok = r.softmax_rel_error <= tolerance;
      col.rows.push_back(r);
    }
    const auto q = quantize(x, word_format);
    col.reduced_class = argmax_comparator(q, ComparatorTreeConfig{q.size(), word_format}).class_index;
    col.softmax_class = predict(s);
  }
  return result;
}

std::vector<CurveRow> emit_monotonicity_data(const InputSpec& spec) {
  spec.validate();
  auto x = gen_trial(spec, 0);
  std::sort(x.begin(), x.end());
  const auto s = softmax_stable(x);
  std::vector<CurveRow> rows(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) rows[i] = CurveRow{x[i], exp_reference(x[i]), s.probs[i]};
  return rows;
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "x,exp_x,softmax_x\n";
  for (const auto& r : rows) out << format_real(r.x) << ',' << format_real(r.exp_x) << ',' << format_real(r.softmax_x) << '\n';
}

std::vector<LogitVector> read_logits_csv(std::istream& in) {
  std::vector<LogitVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    LogitVector row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      const std::string_view field = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw Error(ErrorKind::InputFormat, "line " + std::to_string(line_no) + ": field " +
                                                std::to_string(row.size() + 1) + " is not a finite decimal number");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!out.empty() && row.size() != out.front().size()) {
      throw Error(ErrorKind::InputFormat, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(out.front().size()) + " values, found " +
                                              std::to_string(row.size()));
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_logits_csv(std::ostream& out, std::span<const LogitVector> vectors) {
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out << ',';
      out << format_real(v[i]);
    }
    out << '\n';
  }
}

}  // namespace rsm
