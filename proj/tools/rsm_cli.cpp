// rsm: command-line front end for the softmax output-stage models.
//
//   rsm predict     --input logits.csv --variant reduced
//   rsm compare     --variants reduced,stable --lo -1 --hi 1 --k 10 --trials 1000
//   rsm table1
//   rsm emit-curves --lo -1 --hi 1 --k 10
//   rsm cost        --variant reduced --k 1000
//   rsm gen         --lo -100 --hi 0 --k 10 --trials 5
//   rsm lut         --addr-bits 8 --lut-format sQ1.14

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rsm/error.hpp"
#include "rsm/harness.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kInputFormat = 3,
  kOverflow = 4,
  kIo = 5,
};

struct UnitFlags {
  std::string word = "sQ7.8";
  int lut_bits = 8;
  std::string lut_format = "sQ1.14";
  std::string prob_format = "sQ1.30";
  int iterations = 16;
  std::string cordic_format = "sQ7.16";

  void add_to(CLI::App& app) {
    app.add_option("--word", word, "Logit word format for base2/reduced (sQi.f)")->capture_default_str();
    app.add_option("--lut-bits", lut_bits, "Base-2 LUT address bits")->capture_default_str();
    app.add_option("--lut-format", lut_format, "Base-2 LUT value format")->capture_default_str();
    app.add_option("--prob-format", prob_format, "Pseudo-softmax probability format")->capture_default_str();
    app.add_option("--iterations", iterations, "CORDIC micro-rotations")->capture_default_str();
    app.add_option("--cordic-format", cordic_format, "CORDIC word format")->capture_default_str();
  }

  rsm::UnitConfig to_config(rsm::Variant v) const {
    rsm::UnitConfig cfg;
    cfg.variant = v;
    cfg.word_format = parse_format(word);
    cfg.lut_addr_bits = lut_bits;
    cfg.lut_format = parse_format(lut_format);
    cfg.prob_format = parse_format(prob_format);
    cfg.cordic_iterations = iterations;
    cfg.cordic_format = parse_format(cordic_format);
    return cfg;
  }

  static rsm::QFormat parse_format(const std::string& text) {
    try {
      return rsm::QFormat::parse(text);
    } catch (const rsm::Error& e) {
      throw rsm::Error(rsm::ErrorKind::Usage, e.what());
    }
  }
};

struct RangeFlags {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t k = 10;
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  void add_to(CLI::App& app, std::size_t default_k, std::size_t default_trials) {
    k = default_k;
    trials = default_trials;
    app.add_option("--lo", lo, "Lower bound of the uniform range")->capture_default_str();
    app.add_option("--hi", hi, "Upper bound (exclusive)")->capture_default_str();
    app.add_option("--k", k, "Classes per vector")->capture_default_str();
    app.add_option("--trials", trials, "Number of vectors")->capture_default_str();
    app.add_option("--seed", seed, "Generator seed (default: RSM_SEED or built-in)");
  }

  rsm::InputSpec to_spec(const CLI::App& app) const {
    rsm::InputSpec spec{lo, hi, k, trials, app.count("--seed") > 0 ? seed : rsm::default_seed()};
    try {
      spec.validate();
    } catch (const rsm::Error& e) {
      throw rsm::Error(rsm::ErrorKind::Usage, e.what());
    }
    return spec;
  }
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<rsm::LogitVector> read_input(const std::string& path) {
  if (path == "-") return rsm::read_logits_csv(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file " + path);
  return rsm::read_logits_csv(in);
}

std::vector<rsm::Variant> parse_variant_list(const std::string& text) {
  std::vector<rsm::Variant> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto v = rsm::parse_variant(item);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  if (out.empty()) throw rsm::Error(rsm::ErrorKind::Usage, "no variants given");
  return out;
}

int exit_code_for(rsm::ErrorKind kind) {
  switch (kind) {
    case rsm::ErrorKind::Usage:
    case rsm::ErrorKind::InvalidArgument:
    case rsm::ErrorKind::FormatMismatch:
      return kUsage;
    case rsm::ErrorKind::InputFormat:
      return kInputFormat;
    case rsm::ErrorKind::Overflow:
      return kOverflow;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-accurate models of DNN softmax output stages and the reduced argmax unit"};
  app.require_subcommand(1);

  // predict
  auto* predict = app.add_subcommand("predict", "Predict one class per CSV line");
  std::string predict_input;
  std::string predict_output = "-";
  std::string predict_variant;
  bool predict_probs = false;
  UnitFlags predict_unit;
  predict->add_option("--input", predict_input, "Logit CSV, one vector per line ('-' for stdin)")->required();
  predict->add_option("--variant", predict_variant, "exact|stable|base2|inverse|reduced")->required();
  predict->add_option("--output", predict_output, "Destination ('-' for stdout)")->capture_default_str();
  predict->add_flag("--probs", predict_probs, "Append the probability vector when the variant has one");
  predict_unit.add_to(*predict);

  // compare
  auto* compare = app.add_subcommand("compare", "Agreement and error of variants against an oracle (JSON)");
  std::string compare_variants = "reduced,stable";
  std::string compare_oracle = "stable";
  std::string compare_output = "-";
  bool compare_table1_ranges = false;
  unsigned compare_threads = 1;
  RangeFlags compare_range;
  UnitFlags compare_unit;
  compare->add_option("--variants", compare_variants, "Comma-separated variants")->capture_default_str();
  compare->add_option("--oracle", compare_oracle, "Reference variant (added to the set if missing)")
      ->capture_default_str();
  compare->add_flag("--table1-ranges", compare_table1_ranges,
                    "Run the three golden-table ranges [-100,0], [0,100], [-1,1] instead of --lo/--hi");
  compare->add_option("--threads", compare_threads, "Worker threads (results do not depend on it)")
      ->capture_default_str();
  compare->add_option("--output", compare_output, "Destination ('-' for stdout)")->capture_default_str();
  compare_range.add_to(*compare, 10, 1000);
  compare_unit.add_to(*compare);

  // table1
  auto* table1 = app.add_subcommand("table1", "Reproduce the golden softmax sample table");
  std::string table1_word = "sQ7.8";
  double table1_tolerance = 5e-3;
  table1->add_option("--word", table1_word, "Word format for the comparator tree")->capture_default_str();
  table1->add_option("--tolerance", table1_tolerance, "Relative tolerance")->capture_default_str();

  // emit-curves
  auto* emit = app.add_subcommand("emit-curves", "Sorted x, e^x, softmax(x) rows for plotting (CSV)");
  std::string emit_output = "-";
  RangeFlags emit_range;
  emit->add_option("--output", emit_output, "Destination ('-' for stdout)")->capture_default_str();
  emit_range.add_to(*emit, 10, 1);

  // cost
  auto* cost = app.add_subcommand("cost", "Structural cost record of a unit (JSON)");
  std::string cost_variant;
  std::size_t cost_k = 10;
  UnitFlags cost_unit;
  cost->add_option("--variant", cost_variant, "Variant name")->required();
  cost->add_option("--k", cost_k, "Classes")->capture_default_str();
  cost_unit.add_to(*cost);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate uniform logit vectors (CSV)");
  std::string gen_output = "-";
  RangeFlags gen_range;
  gen->add_option("--output", gen_output, "Destination ('-' for stdout)")->capture_default_str();
  gen_range.add_to(*gen, 10, 1);

  // lut
  auto* lut = app.add_subcommand("lut", "Dump the base-2 exponential LUT (CSV)");
  int lut_bits = 8;
  std::string lut_format = "sQ1.14";
  std::string lut_output = "-";
  lut->add_option("--addr-bits", lut_bits, "Address bits")->capture_default_str();
  lut->add_option("--lut-format", lut_format, "Value format")->capture_default_str();
  lut->add_option("--output", lut_output, "Destination ('-' for stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*predict) {
      const auto variant = rsm::parse_variant(predict_variant);
      const rsm::SoftmaxUnit unit(predict_unit.to_config(variant));
      if (unit.exp_only()) {
        throw rsm::Error(rsm::ErrorKind::Usage, "cordic-exp is an exponential unit only; pick a softmax variant");
      }
      const auto vectors = read_input(predict_input);
      Output out(predict_output);
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        rsm::UnitOutput result;
        try {
          result = unit.evaluate(vectors[i]);
        } catch (const rsm::Error& e) {
          throw rsm::Error(e.kind(), "vector " + std::to_string(i + 1) + ": " + e.what());
        }
        out.stream() << result.class_index;
        if (predict_probs && result.probs) {
          for (double p : *result.probs) out.stream() << ',' << rsm::format_real(p);
        }
        out.stream() << '\n';
      }
    } else if (*compare) {
      rsm::ExperimentConfig cfg;
      cfg.variants = parse_variant_list(compare_variants);
      cfg.oracle = rsm::parse_variant(compare_oracle);
      if (std::find(cfg.variants.begin(), cfg.variants.end(), cfg.oracle) == cfg.variants.end()) {
        cfg.variants.push_back(cfg.oracle);
      }
      cfg.unit = compare_unit.to_config(rsm::Variant::Stable);
      cfg.threads = compare_threads;
      const auto spec = compare_range.to_spec(*compare);
      rsm::ExperimentReport report;
      if (compare_table1_ranges) {
        const auto specs = rsm::table1_ranges(spec.k, spec.trials, spec.seed);
        report = rsm::run_agreement(specs, cfg);
      } else {
        report = rsm::run_agreement(spec, cfg);
      }
      Output out(compare_output);
      out.stream() << report.to_json().dump(2) << '\n';
    } else if (*table1) {
      const auto result = rsm::reproduce_table1(table1_tolerance, UnitFlags::parse_format(table1_word));
      result.write_text(std::cout);
      const bool pass = result.all_within_tolerance() && result.winners_match();
      std::cout << (pass ? "PASS" : "FAIL") << '\n';
      return pass ? kOk : kCheckFailed;
    } else if (*emit) {
      const auto rows = rsm::emit_monotonicity_data(emit_range.to_spec(*emit));
      Output out(emit_output);
      rsm::write_curve_csv(out.stream(), rows);
    } else if (*cost) {
      const auto variant = rsm::parse_variant(cost_variant);
      if (cost_k < 1) throw rsm::Error(rsm::ErrorKind::Usage, "--k must be >= 1");
      const rsm::SoftmaxUnit unit(cost_unit.to_config(variant));
      nlohmann::ordered_json j;
      j["variant"] = rsm::variant_name(variant);
      j["k"] = cost_k;
      j.update(rsm::to_json(unit.cost(cost_k)));
      std::cout << j.dump(2) << '\n';
    } else if (*gen) {
      const auto vectors = rsm::gen_uniform(gen_range.to_spec(*gen));
      Output out(gen_output);
      rsm::write_logits_csv(out.stream(), vectors);
    } else if (*lut) {
      const auto table = rsm::build_lut(lut_bits, UnitFlags::parse_format(lut_format));
      Output out(lut_output);
      table.write_csv(out.stream());
    }
  } catch (const rsm::Error& e) {
    std::cerr << "rsm: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rsm: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
