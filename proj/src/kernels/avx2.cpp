#include <immintrin.h>

#include <cmath>

#include "mfbm/kernels.hpp"

namespace mfbm::kernels {

double windowed_dot_avx2(const EvenCubicTable& table, const double* x, std::size_t n, double t0,
                         double dt) {
  const double limit = static_cast<double>(table.intervals);
  const __m256d vlimit = _mm256_set1_pd(limit);
  const __m256d vinv = _mm256_set1_pd(table.inv_step);
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vt0 = _mm256_set1_pd(t0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d step4 = _mm256_set1_pd(4.0);
  __m256d vp = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();

  const CubicRow* rows = table.rows;
  auto lane_values = [&](__m256d p) {
    const __m256d t = _mm256_add_pd(vt0, _mm256_mul_pd(p, vdt));
    __m256d u = _mm256_mul_pd(_mm256_andnot_pd(sign, t), vinv);
    const __m256d inside = _mm256_cmp_pd(u, vlimit, _CMP_LT_OQ);
    u = _mm256_and_pd(u, inside);  // outside lanes read interval 0, then get masked
    const __m128i j = _mm256_cvttpd_epi32(u);
    const __m256d frac = _mm256_sub_pd(u, _mm256_cvtepi32_pd(j));
    // One aligned row per lane, then a 4x4 transpose into c0..c3.
    const __m256d r0 = _mm256_load_pd(rows[_mm_cvtsi128_si32(j)].c);
    const __m256d r1 = _mm256_load_pd(rows[_mm_extract_epi32(j, 1)].c);
    const __m256d r2 = _mm256_load_pd(rows[_mm_extract_epi32(j, 2)].c);
    const __m256d r3 = _mm256_load_pd(rows[_mm_extract_epi32(j, 3)].c);
    const __m256d s0 = _mm256_unpacklo_pd(r0, r1);
    const __m256d s1 = _mm256_unpackhi_pd(r0, r1);
    const __m256d s2 = _mm256_unpacklo_pd(r2, r3);
    const __m256d s3 = _mm256_unpackhi_pd(r2, r3);
    const __m256d c0 = _mm256_permute2f128_pd(s0, s2, 0x20);
    const __m256d c1 = _mm256_permute2f128_pd(s1, s3, 0x20);
    const __m256d c2 = _mm256_permute2f128_pd(s0, s2, 0x31);
    const __m256d c3 = _mm256_permute2f128_pd(s1, s3, 0x31);
    __m256d f = _mm256_fmadd_pd(c3, frac, c2);
    f = _mm256_fmadd_pd(f, frac, c1);
    f = _mm256_fmadd_pd(f, frac, c0);
    return _mm256_and_pd(f, inside);
  };

  std::size_t p = 0;
  for (; p + 8 <= n; p += 8) {
    const __m256d f0 = lane_values(vp);
    vp = _mm256_add_pd(vp, step4);
    const __m256d f1 = lane_values(vp);
    vp = _mm256_add_pd(vp, step4);
    acc0 = _mm256_fmadd_pd(f0, _mm256_loadu_pd(x + p), acc0);
    acc1 = _mm256_fmadd_pd(f1, _mm256_loadu_pd(x + p + 4), acc1);
  }
  if (p + 4 <= n) {
    acc0 = _mm256_fmadd_pd(lane_values(vp), _mm256_loadu_pd(x + p), acc0);
    vp = _mm256_add_pd(vp, step4);
    p += 4;
  }
  if (p < n) {
    const auto rem = static_cast<long long>(n - p);
    const __m256i mask = _mm256_cmpgt_epi64(_mm256_set1_epi64x(rem), _mm256_set_epi64x(3, 2, 1, 0));
    acc1 = _mm256_fmadd_pd(lane_values(vp), _mm256_maskload_pd(x + p, mask), acc1);
  }

  const __m256d acc = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace mfbm::kernels
