// AVX2+FMA lane for the fieldwise reduction kernels. Compiled with
// -mavx2 -mfma when the toolchain supports it; the dispatcher only hands the
// table out after a runtime CPU check, so linking this TU is always safe.

#include "xdiff/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#if defined(XDIFF_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
#define XDIFF_AVX2_LANE 1
#include <immintrin.h>
#endif

namespace xdiff::kernels {

#if XDIFF_AVX2_LANE

namespace {

// log(x) for positive normal/denormal doubles, ~2 ulp. Lanes with x <= 0
// produce finite garbage that callers mask away (the 0 log 0 convention).
inline __m256d vlog_pd(__m256d x) {
  const __m256d kOne = _mm256_set1_pd(1.0);
  const __m256d kMinNormal = _mm256_set1_pd(2.2250738585072014e-308);

  const __m256d denorm = _mm256_cmp_pd(x, kMinNormal, _CMP_LT_OQ);
  const __m256d xs =
      _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(0x1.0p54)), denorm);

  const __m256i bits = _mm256_castpd_si256(xs);
  const __m256i ebits = _mm256_srli_epi64(bits, 52);
  const __m256i mrep = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
      _mm256_set1_epi64x(0x3FF0000000000000ll));
  __m256d mant = _mm256_castsi256_pd(mrep);

  // biased exponent -> double via the 2^52 digit trick (values in [0, 2047])
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(
          _mm256_or_si256(ebits, _mm256_set1_epi64x(0x4330000000000000ll))),
      _mm256_set1_pd(4503599627370496.0 + 1023.0));
  e = _mm256_blendv_pd(e, _mm256_sub_pd(e, _mm256_set1_pd(54.0)), denorm);

  // fold mantissa into [1/sqrt2, sqrt2) so e*ln2 never cancels the series
  const __m256d fold =
      _mm256_cmp_pd(mant, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  mant = _mm256_blendv_pd(mant, _mm256_mul_pd(mant, _mm256_set1_pd(0.5)), fold);
  e = _mm256_blendv_pd(e, _mm256_add_pd(e, kOne), fold);

  // log(mant) = 2 atanh(r), r = (m-1)/(m+1), |r| <= 0.1716
  const __m256d r =
      _mm256_div_pd(_mm256_sub_pd(mant, kOne), _mm256_add_pd(mant, kOne));
  const __m256d s = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.0 / 21.0);
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, s, _mm256_set1_pd(1.0 / 3.0));
  const __m256d lo =
      _mm256_mul_pd(_mm256_mul_pd(r, s), p);  // atanh(r) - r

  const __m256d kLn2Hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d kLn2Lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d two_r = _mm256_add_pd(r, r);
  const __m256d two_lo = _mm256_fmadd_pd(e, kLn2Lo, _mm256_add_pd(lo, lo));
  return _mm256_add_pd(_mm256_fmadd_pd(e, kLn2Hi, two_r), two_lo);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double xlogx_minus_x(double x) {
  return x > 0.0 ? x * (std::log(x) - 1.0) : 0.0;
}

// term = u (log u - 1) masked to 0 where u <= 0
inline __m256d entropy_term(__m256d u) {
  const __m256d pos = _mm256_cmp_pd(u, _mm256_setzero_pd(), _CMP_GT_OQ);
  const __m256d t =
      _mm256_mul_pd(u, _mm256_sub_pd(vlog_pd(u), _mm256_set1_pd(1.0)));
  return _mm256_and_pd(t, pos);
}

double entropy_sum_avx2(const double* const* species, int n, std::size_t m) {
  const std::size_t vec_end = m - m % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t c = 0; c < vec_end; c += 4) {
    __m256d u0 = _mm256_set1_pd(1.0);
    for (int i = 0; i < n; ++i) {
      const __m256d ui = _mm256_loadu_pd(species[i] + c);
      u0 = _mm256_sub_pd(u0, ui);
      acc = _mm256_add_pd(acc, entropy_term(ui));
    }
    acc = _mm256_add_pd(acc, entropy_term(u0));
  }
  double tail = 0.0;
  for (std::size_t c = vec_end; c < m; ++c) {
    double u0 = 1.0;
    for (int i = 0; i < n; ++i) {
      u0 -= species[i][c];
      tail += xlogx_minus_x(species[i][c]);
    }
    tail += xlogx_minus_x(u0);
  }
  return hsum(acc) + tail;
}

// term = u log(u/v) - u + v, with u log(u/v) masked to 0 where u <= 0
inline __m256d rel_entropy_term(__m256d u, __m256d v) {
  const __m256d pos = _mm256_cmp_pd(u, _mm256_setzero_pd(), _CMP_GT_OQ);
  const __m256d log_part =
      _mm256_and_pd(_mm256_mul_pd(u, vlog_pd(_mm256_div_pd(u, v))), pos);
  return _mm256_add_pd(log_part, _mm256_sub_pd(v, u));
}

inline double rel_entropy_term_scalar(double u, double v) {
  return (u > 0.0 ? u * std::log(u / v) : 0.0) - u + v;
}

double relative_entropy_sum_avx2(const double* const* u, const double* const* v,
                                 int n, std::size_t m) {
  const std::size_t vec_end = m - m % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t c = 0; c < vec_end; c += 4) {
    __m256d u0 = _mm256_set1_pd(1.0);
    __m256d v0 = _mm256_set1_pd(1.0);
    for (int i = 0; i < n; ++i) {
      const __m256d ui = _mm256_loadu_pd(u[i] + c);
      const __m256d vi = _mm256_loadu_pd(v[i] + c);
      u0 = _mm256_sub_pd(u0, ui);
      v0 = _mm256_sub_pd(v0, vi);
      acc = _mm256_add_pd(acc, rel_entropy_term(ui, vi));
    }
    acc = _mm256_add_pd(acc, rel_entropy_term(u0, v0));
  }
  double tail = 0.0;
  for (std::size_t c = vec_end; c < m; ++c) {
    double u0 = 1.0, v0 = 1.0;
    for (int i = 0; i < n; ++i) {
      u0 -= u[i][c];
      v0 -= v[i][c];
      tail += rel_entropy_term_scalar(u[i][c], v[i][c]);
    }
    tail += rel_entropy_term_scalar(u0, v0);
  }
  return hsum(acc) + tail;
}

double sq_diff_sum_avx2(const double* const* u, const double* const* v,
                        int n, std::size_t m) {
  const std::size_t vec_end = m - m % 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t c = 0; c < vec_end; c += 4) {
    __m256d du0 = _mm256_setzero_pd();
    for (int i = 0; i < n; ++i) {
      const __m256d d =
          _mm256_sub_pd(_mm256_loadu_pd(u[i] + c), _mm256_loadu_pd(v[i] + c));
      du0 = _mm256_sub_pd(du0, d);  // u0 - v0 = -sum_i (u_i - v_i)
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    acc = _mm256_fmadd_pd(du0, du0, acc);
  }
  double tail = 0.0;
  for (std::size_t c = vec_end; c < m; ++c) {
    double du0 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = u[i][c] - v[i][c];
      du0 -= d;
      tail += d * d;
    }
    tail += du0 * du0;
  }
  return hsum(acc) + tail;
}

double hl2_min_slack_avx2(const double* y, const double* z, std::size_t m) {
  const std::size_t vec_end = m - m % 4;
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d half = _mm256_set1_pd(0.5);
  for (std::size_t k = 0; k < vec_end; k += 4) {
    const __m256d a = _mm256_loadu_pd(y + k);
    const __m256d b = _mm256_loadu_pd(z + k);
    const __m256d d = _mm256_sub_pd(a, b);
    const __m256d quad = _mm256_div_pd(
        _mm256_mul_pd(half, _mm256_mul_pd(d, d)), _mm256_max_pd(a, b));
    const __m256d ent = _mm256_sub_pd(
        _mm256_mul_pd(a, vlog_pd(_mm256_div_pd(a, b))), d);
    best = _mm256_min_pd(best, _mm256_sub_pd(ent, quad));
  }
  const __m128d lo128 = _mm256_castpd256_pd128(best);
  const __m128d hi128 = _mm256_extractf128_pd(best, 1);
  const __m128d m2 = _mm_min_pd(lo128, hi128);
  double out = _mm_cvtsd_f64(_mm_min_sd(m2, _mm_unpackhi_pd(m2, m2)));
  for (std::size_t k = vec_end; k < m; ++k) {
    const double d = y[k] - z[k];
    out = std::min(out, y[k] * std::log(y[k] / z[k]) - d -
                            0.5 * d * d / std::max(y[k], z[k]));
  }
  return out;
}

const Ops kAvx2Ops = {
    "avx2",
    &entropy_sum_avx2,
    &relative_entropy_sum_avx2,
    &sq_diff_sum_avx2,
    &hl2_min_slack_avx2,
};

}  // namespace

const Ops* avx2_ops() {
  static const Ops* ops = [] {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")
               ? &kAvx2Ops
               : static_cast<const Ops*>(nullptr);
  }();
  return ops;
}

#else  // !XDIFF_AVX2_LANE

const Ops* avx2_ops() { return nullptr; }

#endif

}  // namespace xdiff::kernels
