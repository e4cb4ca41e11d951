// Acceptance runner: one PASS/FAIL line per criterion.
//   rsm_acceptance [--criterion N] [--rsm PATH]
// Without --criterion every criterion runs. --rsm points at the CLI binary
// used by the determinism check; without it only the library path is checked.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rsm/exp_units.hpp"
#include "rsm/harness.hpp"
#include "rsm/reduced_unit.hpp"
#include "rsm/rng.hpp"
#include "rsm/softmax_units.hpp"

using namespace rsm;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string cli_path;

bool tie_free(std::span<const double> x) {
  return std::count(x.begin(), x.end(), *std::max_element(x.begin(), x.end())) == 1;
}

std::size_t first_max(std::span<const double> x) {
  return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

Verdict argmax_preserved() {
  const auto start = std::chrono::steady_clock::now();
  constexpr std::size_t kPerCell = 11112;
  std::size_t vectors = 0, tie_free_count = 0, mismatches = 0;
  std::uint64_t seed = kDefaultSeed;
  for (std::size_t k : {2, 10, 1000}) {
    for (const auto& spec : table1_ranges(k, kPerCell, seed)) {
      for (std::size_t t = 0; t < spec.trials; ++t) {
        const auto x = gen_trial(spec, t);
        ++vectors;
        if (!tie_free(x)) continue;
        ++tie_free_count;
        if (argmax_comparator_real(x) != predict(softmax_stable(x))) ++mismatches;
      }
    }
    seed += 3;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << vectors << " vectors, " << tie_free_count << " tie-free, " << mismatches << " mismatches, " << secs << " s";
  return {vectors >= 100000 && mismatches == 0 && secs < 60.0, d.str()};
}

Verdict golden_table() {
  const auto r = reproduce_table1(5e-3);
  std::ostringstream d;
  d << r.rows_within_tolerance() << "/30 rows within 5e-3";
  for (const auto& c : r.columns) {
    for (std::size_t i = 0; i < c.rows.size(); ++i) {
      const auto& row = c.rows[i];
      if (!row.exp_ok || !row.softmax_ok) {
        d << "; " << c.label << "[" << i << "] x=" << row.input_text << " exp err " << row.exp_rel_error << " s err "
          << row.softmax_rel_error;
      }
    }
  }
  d << "; winners " << r.columns[0].reduced_class << "," << r.columns[1].reduced_class << ","
    << r.columns[2].reduced_class << (r.winners_match() ? " (match)" : " (MISMATCH)");
  return {r.all_within_tolerance() && r.winners_match(), d.str()};
}

Verdict inverse_duality() {
  SplitMix64 rng(kDefaultSeed);
  double worst = 0.0;
  std::size_t argmin_mismatch = 0, scored = 0;
  for (std::size_t t = 0; t < 10000; ++t) {
    const std::size_t k = std::vector<std::size_t>{2, 10, 100}[t % 3];
    const auto x = gen_trial(InputSpec{-20.0, 20.0, k, 10000, kDefaultSeed}, t);
    const auto s = inverse_softmax(x);
    const auto p = softmax_stable(x);
    for (std::size_t j = 0; j < k; ++j) worst = std::max(worst, std::fabs(s.scores[j] * p.probs[j] - 1.0));
    if (!tie_free(x)) continue;
    ++scored;
    if (predict_inverse(s) != first_max(x)) ++argmin_mismatch;
  }
  std::ostringstream d;
  d << "max |s'*s - 1| = " << worst << ", argmin mismatches " << argmin_mismatch << "/" << scored;
  return {worst <= 1e-9 && argmin_mismatch == 0, d.str()};
}

Verdict base2_recomposition() {
  double worst_real = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double y = -80.0 + 160.0 * i / 9999.0;
    const auto d = exp_base2_decompose(y);
    const long double recomposed = std::ldexp(std::exp2(static_cast<long double>(d.frac)), static_cast<int>(d.shift));
    const long double exact = std::exp(static_cast<long double>(y));
    worst_real = std::max(worst_real, static_cast<double>(std::fabs(recomposed - exact) / exact));
  }

  const auto lut = build_lut(8, QFormat{1, 14, true});
  const QFormat in{7, 24, true};
  const QFormat out{12, 20, true};
  std::size_t violations = 0;
  double worst_excess = -INFINITY;
  for (int i = 0; i < 10000; ++i) {
    const Fixed y = from_real(-8.0 + 16.0 * i / 9999.0, in);
    const double yr = y.to_real();
    const double exact = exp_reference(yr);
    const double u = std::floor(yr * log2e());
    const double ulp = std::max(std::ldexp(lut.value_format().resolution(), static_cast<int>(u)), out.resolution());
    const double bound = exact * std::log(2.0) / 256.0 + 2 * ulp;
    const double err = std::fabs(exp_base2(y, lut, out).to_real() - exact);
    worst_excess = std::max(worst_excess, (err - bound) / exact);
    if (err > bound) ++violations;
  }
  std::ostringstream d;
  d << "recomposition max rel err " << worst_real << "; 8-bit LUT bound violations " << violations
    << ", worst (err - bound)/e^y " << worst_excess;
  return {worst_real <= 1e-12 && violations == 0, d.str()};
}

double cordic_max_rel_error(int iterations) {
  const CordicConfig cfg(iterations, QFormat{7, 16, true});
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Fixed x = from_real(-1.0 + 2.0 * i / 9999.0, cfg.word_format());
    const double exact = exp_reference(x.to_real());
    worst = std::max(worst, std::fabs(exp_cordic(x, cfg).to_real() - exact) / exact);
  }
  return worst;
}

Verdict cordic_error() {
  const double e8 = cordic_max_rel_error(8);
  const double e16 = cordic_max_rel_error(16);
  const double e24 = cordic_max_rel_error(24);
  std::ostringstream d;
  d << "max rel err 8: " << e8 << ", 16: " << e16 << ", 24: " << e24;
  return {e16 <= 1e-3 && e16 <= e8 && e24 <= e16, d.str()};
}

Verdict tree_equivalence() {
  const QFormat f{1, 2, true};  // 4-bit raw, -8..7
  std::size_t cases = 0, mismatches = 0;
  auto check = [&](const std::vector<std::int64_t>& raw) {
    ++cases;
    const FixedVector v{f, raw};
    const auto tree = argmax_comparator(v, ComparatorTreeConfig{raw.size(), f});
    const auto lin = argmax_linear(v);
    if (tree.class_index != lin.class_index || !(tree.winner_value == lin.winner_value)) ++mismatches;
  };

  for (std::size_t k = 1; k <= 5; ++k) {
    std::size_t total = std::size_t{1} << (4 * k);
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<std::int64_t> raw(k);
      for (std::size_t i = 0; i < k; ++i) raw[i] = static_cast<std::int64_t>((code >> (4 * i)) & 15) - 8;
      check(raw);
    }
  }
  SplitMix64 rng(kDefaultSeed);
  for (std::size_t k = 6; k <= 8; ++k) {
    for (int s = 0; s < 1000000; ++s) {
      std::vector<std::int64_t> raw(k);
      for (auto& r : raw) r = static_cast<std::int64_t>(rng.next() & 15) - 8;
      check(raw);
    }
  }
  // every placement of a tied maximum, remaining entries exhaustively below it
  // for k <= 4 and at fixed lower values beyond
  for (std::size_t k = 1; k <= 8; ++k) {
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      for (std::int64_t top = -8; top <= 7; ++top) {
        std::vector<std::int64_t> raw(k, top);
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < k; ++i) {
          if (!(mask & (1u << i))) free.push_back(i);
        }
        if (free.empty()) {
          check(raw);
          continue;
        }
        if (top == -8) continue;
        const std::int64_t below = top + 8;  // values -8..top-1
        if (k <= 4) {
          std::size_t total = 1;
          for (std::size_t i = 0; i < free.size(); ++i) total *= static_cast<std::size_t>(below);
          for (std::size_t code = 0; code < total; ++code) {
            std::size_t c = code;
            for (std::size_t i : free) {
              raw[i] = -8 + static_cast<std::int64_t>(c % static_cast<std::size_t>(below));
              c /= static_cast<std::size_t>(below);
            }
            check(raw);
          }
        } else {
          for (std::int64_t lower = -8; lower < top; ++lower) {
            for (std::size_t i : free) raw[i] = lower;
            check(raw);
          }
        }
      }
    }
  }
  std::ostringstream d;
  d << cases << " cases, " << mismatches << " mismatches";
  return {mismatches == 0, d.str()};
}

Verdict cost_claim() {
  const auto reduced = cost_of_unit(Variant::Reduced, CostParams{1000});
  const auto exact = cost_of_unit(Variant::Exact, CostParams{1000});
  std::ostringstream d;
  d << "reduced: " << reduced.comparators << " comparators, " << reduced.exp_evaluations << " exps, "
    << reduced.dividers << " dividers, " << reduced.lut_bits << " LUT bits; exact: " << exact.exp_evaluations
    << " exps, " << exact.dividers << " dividers";
  const bool ok = reduced.comparators == 999 && reduced.exp_evaluations == 0 && reduced.dividers == 0 &&
                  reduced.lut_bits == 0 && exact.exp_evaluations >= 1000 && exact.dividers >= 1000;
  return {ok, d.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  ExperimentConfig cfg;
  cfg.variants = {Variant::Reduced, Variant::Stable, Variant::Exact, Variant::Inverse, Variant::Base2,
                  Variant::CordicExp};
  const auto specs = table1_ranges(10, 2000, kDefaultSeed);
  const std::string a = run_agreement(specs, cfg).to_json().dump(2);
  cfg.threads = 3;
  const std::string b = run_agreement(specs, cfg).to_json().dump(2);
  bool ok = a == b;
  std::ostringstream d;
  d << "library reports " << (ok ? "identical" : "differ");

  if (!cli_path.empty()) {
    const auto dir = std::filesystem::temp_directory_path() / ("rsm_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const std::string flags =
        " compare --variants reduced,stable,exact,inverse,base2,cordic-exp --table1-ranges --k 1000 --trials 200 "
        "--seed 7 --threads 4";
    int rc1 = std::system((cli_path + flags + " --output " + (dir / "a.json").string()).c_str());
    int rc2 = std::system((cli_path + flags + " --output " + (dir / "b.json").string()).c_str());
    const std::string ja = slurp(dir / "a.json");
    const std::string jb = slurp(dir / "b.json");
    const bool cli_ok = rc1 == 0 && rc2 == 0 && !ja.empty() && ja == jb;
    d << "; CLI runs " << (cli_ok ? "byte-identical" : "differ or failed") << " (" << ja.size() << " bytes)";
    std::filesystem::remove_all(dir);
    ok = ok && cli_ok;
  }
  return {ok, d.str()};
}

const std::vector<std::pair<std::string, std::function<Verdict()>>> kCriteria{
    {"argmax of logits equals argmax of softmax", argmax_preserved},
    {"golden softmax table reproduction", golden_table},
    {"inverse softmax duality", inverse_duality},
    {"base-2 recomposition and LUT error bound", base2_recomposition},
    {"CORDIC exponential accuracy", cordic_error},
    {"comparator tree equals linear argmax", tree_equivalence},
    {"reduced unit cost record", cost_claim},
    {"compare reports are deterministic", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--rsm" && i + 1 < argc) {
      cli_path = argv[++i];
    } else {
      std::cerr << "usage: rsm_acceptance [--criterion N] [--rsm PATH]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(kCriteria.size())) {
    std::cerr << "criterion must be 1.." << kCriteria.size() << "\n";
    return 2;
  }
  bool all = true;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    Verdict v;
    try {
      v = kCriteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << i + 1 << " [" << (v.pass ? "PASS" : "FAIL") << "] " << kCriteria[i].first << ": "
              << v.detail << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
