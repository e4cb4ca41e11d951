#include "rsm/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define RSM_HAVE_AVX2 1
#include <immintrin.h>
#else
#define RSM_HAVE_AVX2 0
#endif

#include <algorithm>
#include <limits>

#include "rsm/error.hpp"

namespace rsm::kernels::avx2 {

#if RSM_HAVE_AVX2

#define RSM_AVX2 __attribute__((target("avx2")))

namespace {

const KernelTable& ref() { return scalar::table(); }

RSM_AVX2 inline __m256i max_epi64(__m256i a, __m256i b) {
  return _mm256_blendv_epi8(a, b, _mm256_cmpgt_epi64(b, a));
}

RSM_AVX2 inline __m256i min_epi64(__m256i a, __m256i b) {
  return _mm256_blendv_epi8(a, b, _mm256_cmpgt_epi64(a, b));
}

RSM_AVX2 __m256i load(const std::int64_t* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }

RSM_AVX2 std::size_t first_equal_i64(std::span<const std::int64_t> x, std::int64_t value) {
  const __m256i target = _mm256_set1_epi64x(value);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_castsi256_pd(_mm256_cmpeq_epi64(load(&x[i]), target)));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < x.size(); ++i) {
    if (x[i] == value) return i;
  }
  return 0;
}

RSM_AVX2 std::size_t first_equal_f64(std::span<const double> x, double value) {
  const __m256d target = _mm256_set1_pd(value);
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(&x[i]), target, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < x.size(); ++i) {
    if (x[i] == value) return i;
  }
  return 0;
}

RSM_AVX2 std::int64_t max_i64(std::span<const std::int64_t> x) {
  __m256i m = load(x.data());
  std::size_t i = 4;
  for (; i + 4 <= x.size(); i += 4) m = max_epi64(m, load(&x[i]));
  alignas(32) std::int64_t lane[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lane), m);
  std::int64_t best = std::max(std::max(lane[0], lane[1]), std::max(lane[2], lane[3]));
  for (; i < x.size(); ++i) best = std::max(best, x[i]);
  return best;
}

RSM_AVX2 double max_f64(std::span<const double> x) {
  if (x.size() < 8) return ref().max_f64(x);
  __m256d m = _mm256_loadu_pd(x.data());
  std::size_t i = 4;
  for (; i + 4 <= x.size(); i += 4) m = _mm256_max_pd(m, _mm256_loadu_pd(&x[i]));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double best = lane[0];
  for (int l = 1; l < 4; ++l) best = lane[l] > best ? lane[l] : best;
  for (; i < x.size(); ++i) best = x[i] > best ? x[i] : best;
  return best;
}

RSM_AVX2 std::size_t argmax_i64(std::span<const std::int64_t> x) {
  if (x.size() < 8) return ref().argmax_i64(x);
  return first_equal_i64(x, max_i64(x));
}

RSM_AVX2 std::size_t argmax_f64(std::span<const double> x) {
  if (x.size() < 8) return ref().argmax_f64(x);
  return first_equal_f64(x, max_f64(x));
}

RSM_AVX2 TopTwoI64 top2_i64(std::span<const std::int64_t> x) {
  if (x.size() < 8) return ref().top2_i64(x);
  __m256i first = load(x.data());
  __m256i second = _mm256_set1_epi64x(INT64_MIN);
  std::size_t i = 4;
  for (; i + 4 <= x.size(); i += 4) {
    const __m256i v = load(&x[i]);
    second = max_epi64(second, min_epi64(v, first));
    first = max_epi64(first, v);
  }
  alignas(32) std::int64_t f[4];
  alignas(32) std::int64_t s[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(f), first);
  _mm256_store_si256(reinterpret_cast<__m256i*>(s), second);
  std::int64_t top = f[0];
  std::int64_t next = s[0];
  auto insert = [&](std::int64_t v) {
    next = std::max(next, std::min(v, top));
    top = std::max(top, v);
  };
  for (int l = 1; l < 4; ++l) {
    insert(f[l]);
    insert(s[l]);
  }
  for (; i < x.size(); ++i) insert(x[i]);
  return TopTwoI64{first_equal_i64(x, top), top, next};
}

RSM_AVX2 TopTwoF64 top2_f64(std::span<const double> x) {
  if (x.size() < 8) return ref().top2_f64(x);
  __m256d first = _mm256_loadu_pd(x.data());
  __m256d second = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 4;
  for (; i + 4 <= x.size(); i += 4) {
    const __m256d v = _mm256_loadu_pd(&x[i]);
    second = _mm256_max_pd(second, _mm256_min_pd(v, first));
    first = _mm256_max_pd(first, v);
  }
  alignas(32) double f[4];
  alignas(32) double s[4];
  _mm256_store_pd(f, first);
  _mm256_store_pd(s, second);
  double top = f[0];
  double next = s[0];
  auto insert = [&](double v) {
    next = std::max(next, std::min(v, top));
    top = std::max(top, v);
  };
  for (int l = 1; l < 4; ++l) {
    insert(f[l]);
    insert(s[l]);
  }
  for (; i < x.size(); ++i) insert(x[i]);
  return TopTwoF64{first_equal_f64(x, top), top, next};
}

RSM_AVX2 double sum_f64(std::span<const double> x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(&x[i]));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t l = 0; i < x.size(); ++i, ++l) lane[l] += x[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

RSM_AVX2 void div_f64(std::span<const double> in, double d, std::span<double> out) {
  const __m256d divisor = _mm256_set1_pd(d);
  std::size_t i = 0;
  for (; i + 4 <= in.size(); i += 4) _mm256_storeu_pd(&out[i], _mm256_div_pd(_mm256_loadu_pd(&in[i]), divisor));
  for (; i < in.size(); ++i) out[i] = in[i] / d;
}

RSM_AVX2 std::int64_t sat_sum_nonneg_i64(std::span<const std::int64_t> x, std::int64_t max_raw) {
  // lane + addend must not wrap
  if (max_raw > (static_cast<std::int64_t>(1) << 62)) return ref().sat_sum_nonneg_i64(x, max_raw);
  const __m256i limit = _mm256_set1_epi64x(max_raw);
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) acc = min_epi64(_mm256_add_epi64(acc, load(&x[i])), limit);
  alignas(32) std::int64_t lane[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lane), acc);
  for (std::size_t l = 0; i < x.size(); ++i, ++l) lane[l] = std::min(lane[l] + x[i], max_raw);
  const __int128 total = static_cast<__int128>(lane[0]) + lane[1] + lane[2] + lane[3];
  return total > max_raw ? max_raw : static_cast<std::int64_t>(total);
}

}  // namespace

bool compiled() { return true; }

const KernelTable& table() {
  static const KernelTable t{Isa::Avx2, "avx2", argmax_i64, argmax_f64, top2_i64, top2_f64,
                             max_f64,   sum_f64, div_f64,    sat_sum_nonneg_i64};
  return t;
}

#else

bool compiled() { return false; }

const KernelTable& table() { throw Error(ErrorKind::InvalidArgument, "AVX2 kernels not compiled for this target"); }

#endif

}  // namespace rsm::kernels::avx2
