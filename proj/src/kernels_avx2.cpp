// Compiled with -mavx2 -mfma. Nothing in here may run before the dispatcher
// has confirmed CPU support.
#include "dmpanim/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace dmpanim::kernels {
namespace {

// exp(x) for x <= 0. Range reduction x = k ln2 + r, |r| <= ln2/2, then a
// degree-13 Taylor polynomial which is accurate to about 1 ulp on that range.
// Inputs below -708 flush to zero instead of producing subnormals.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lower = _mm256_set1_pd(-708.0);

  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (std::size_t i = 1; i < std::size(kInvFact); ++i) {
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));
  }

  // 2^k via the exponent field.
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i bits = _mm256_cvtepi32_epi64(k32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d scale = _mm256_castsi256_pd(bits);

  const __m256d result = _mm256_mul_pd(p, scale);
  return _mm256_andnot_pd(underflow, result);
}

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void activations_avx2(const double* centers, const double* widths, std::size_t n, double x,
                      double* out) {
  const __m256d vx = _mm256_set1_pd(x);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(centers + i));
    // Same association as the scalar version, (-w * d) * d, so both round the
    // argument identically.
    const __m256d neg_w = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_loadu_pd(widths + i));
    const __m256d arg = _mm256_mul_pd(_mm256_mul_pd(neg_w, d), d);
    _mm256_storeu_pd(out + i, exp_nonpositive(arg));
  }
  for (; i < n; ++i) {
    const double d = x - centers[i];
    out[i] = std::exp(-widths[i] * d * d);
  }
}

WeightedSums weighted_sums_avx2(const double* weights, const double* activations,
                                std::size_t n) {
  __m256d acc_w = _mm256_setzero_pd();
  __m256d acc_t = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(activations + i);
    acc_w = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i), a, acc_w);
    acc_t = _mm256_add_pd(acc_t, a);
  }
  WeightedSums s{horizontal_sum(acc_w), horizontal_sum(acc_t)};
  for (; i < n; ++i) {
    s.weighted += weights[i] * activations[i];
    s.total += activations[i];
  }
  return s;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Backend::Avx2, "avx2", &activations_avx2, &weighted_sums_avx2,
                                 &axpy_avx2};
  return table;
}

}  // namespace dmpanim::kernels
