#ifdef DPMETER_HAVE_AVX2

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "backends.hpp"
#include "transforms.hpp"
#include "vec_avx2.hpp"

namespace dpmeter::kernels {
namespace {

void laplace_avx2(const double* u, std::size_t n, double scale, double* out) {
  laplace_array<VecD4>(u, n, scale, out);
}

void gaussian_avx2(const double* u, std::size_t pairs, double sigma, double* out) {
  gaussian_array<VecD4>(u, pairs, sigma, out);
}

void geometric_avx2(const double* u, std::size_t n, GeometricParams gp, double* out) {
  geometric_array<VecD4>(u, n, gp, out);
}

void add_avx2(const double* a, const double* b, std::size_t n, double* out) {
  add_array<VecD4>(a, b, n, out);
}

void abs_diff_avx2(const double* a, const double* b, std::size_t n, double* out) {
  abs_diff_array<VecD4>(a, b, n, out);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d vacc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vacc = _mm256_add_pd(vacc, _mm256_loadu_pd(x + i));
  alignas(32) double acc[4];
  _mm256_store_pd(acc, vacc);
  for (; i < n; ++i) acc[i & 3] += x[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d signmask = _mm256_set1_pd(-0.0);
  __m256d vacc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    vacc = _mm256_add_pd(vacc, _mm256_andnot_pd(signmask, d));
  }
  alignas(32) double acc[4];
  _mm256_store_pd(acc, vacc);
  for (; i < n; ++i) acc[i & 3] += std::fabs(a[i] - b[i]);
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

}  // namespace

const Ops kAvx2Ops = {
    laplace_avx2, gaussian_avx2, geometric_avx2, add_avx2,
    abs_diff_avx2, sum_avx2, sum_abs_diff_avx2,
};

}  // namespace dpmeter::kernels

#endif  // DPMETER_HAVE_AVX2
