#include <cmath>
#include <cstddef>

#include "backends.hpp"
#include "transforms.hpp"

// Reference backend. The 4-lane accumulator layout in the reductions is part
// of the kernel contract: it matches the AVX2 register lanes element for
// element, which is what makes the two backends bit-identical.

namespace dpmeter::kernels {
namespace {

void laplace_scalar(const double* u, std::size_t n, double scale, double* out) {
  laplace_array<VecD1>(u, n, scale, out);
}

void gaussian_scalar(const double* u, std::size_t pairs, double sigma, double* out) {
  gaussian_array<VecD1>(u, pairs, sigma, out);
}

void geometric_scalar(const double* u, std::size_t n, GeometricParams gp, double* out) {
  geometric_array<VecD1>(u, n, gp, out);
}

void add_scalar(const double* a, const double* b, std::size_t n, double* out) {
  add_array<VecD1>(a, b, n, out);
}

void abs_diff_scalar(const double* a, const double* b, std::size_t n, double* out) {
  abs_diff_array<VecD1>(a, b, n, out);
}

double sum_scalar(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i];
    acc[1] += x[i + 1];
    acc[2] += x[i + 2];
    acc[3] += x[i + 3];
  }
  for (; i < n; ++i) acc[i & 3] += x[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += std::fabs(a[i] - b[i]);
    acc[1] += std::fabs(a[i + 1] - b[i + 1]);
    acc[2] += std::fabs(a[i + 2] - b[i + 2]);
    acc[3] += std::fabs(a[i + 3] - b[i + 3]);
  }
  for (; i < n; ++i) acc[i & 3] += std::fabs(a[i] - b[i]);
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

}  // namespace

const Ops kScalarOps = {
    laplace_scalar, gaussian_scalar, geometric_scalar, add_scalar,
    abs_diff_scalar, sum_scalar, sum_abs_diff_scalar,
};

}  // namespace dpmeter::kernels
