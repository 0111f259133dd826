#include <immintrin.h>

#include "sresn/kernels.hpp"

namespace sresn::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_squares_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(v, v));
  }
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void sr_update_avx2(const double* xi, const double* drive, const double* noise,
                    const SrCoefficients& c, double* out, std::size_t n) {
  const __m256d alpha = _mm256_set1_pd(c.alpha);
  const __m256d beta = _mm256_set1_pd(c.beta);
  const __m256d dt = _mm256_set1_pd(c.dt);
  const __m256d amp = _mm256_set1_pd(c.noise_amp);
  const __m256d noise_dt = _mm256_set1_pd(c.noise_dt);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xi + i);
    const __m256d cube = _mm256_mul_pd(_mm256_mul_pd(x, x), x);
    const __m256d drift =
        _mm256_mul_pd(_mm256_sub_pd(_mm256_mul_pd(alpha, x), _mm256_mul_pd(beta, cube)), dt);
    const __m256d kick = noise ? _mm256_mul_pd(_mm256_mul_pd(amp, _mm256_loadu_pd(noise + i)),
                                               noise_dt)
                               : _mm256_setzero_pd();
    const __m256d forced = _mm256_mul_pd(_mm256_loadu_pd(drive + i), dt);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(x, drift), kick), forced));
  }
  for (; i < n; ++i) {
    const double x = xi[i];
    const double cube = x * x * x;
    const double drift = (c.alpha * x - c.beta * cube) * c.dt;
    const double kick = noise ? c.noise_amp * noise[i] * c.noise_dt : 0.0;
    out[i] = x + drift + kick + drive[i] * c.dt;
  }
}

}  // namespace

const KernelTable& avx2_table_impl() noexcept {
  static const KernelTable table{Isa::Avx2, dot_avx2, sum_squares_avx2, axpy_avx2,
                                 sr_update_avx2};
  return table;
}

}  // namespace sresn::kernels
