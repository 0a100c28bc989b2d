#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace dpmeter::kernels {

enum class Backend { kScalar, kAvx2 };

// Precomputed constants for the two-sided geometric inverse-CDF transform.
struct GeometricParams {
  double log_alpha;       // ln(alpha) = -eps/delta_db, exact by construction
  double one_plus_alpha;  // 1 + alpha
  double thresh_neg;      // alpha / (1 + alpha): CDF(-1)
  double thresh_pos;      // 1 / (1 + alpha): CDF(0)
};

// Array kernels. Every backend produces bit-identical outputs for identical
// inputs (the equivalence tests assert this), so backend selection changes
// throughput, never results. All transforms expect unit draws strictly inside
// (0, 1) as produced by Rng::unit_open.
struct Ops {
  // out[i] = Laplace(0, scale) noise from u[i] via inverse CDF.
  void (*laplace_from_unit)(const double* u, std::size_t n, double scale, double* out);
  // Box-Muller: u holds 2*pairs draws, radius block then angle block; writes
  // 2*pairs N(0, sigma^2) values, cosine block then sine block.
  void (*gaussian_from_unit)(const double* u, std::size_t pairs, double sigma, double* out);
  // out[i] = two-sided geometric sample (integral-valued double) from u[i].
  void (*geometric_from_unit)(const double* u, std::size_t n, GeometricParams gp, double* out);
  void (*add)(const double* a, const double* b, std::size_t n, double* out);
  void (*abs_diff)(const double* a, const double* b, std::size_t n, double* out);
  // Reductions use a fixed 4-lane accumulator in every backend so the
  // floating-point summation order is backend-independent.
  double (*sum)(const double* x, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
};

bool avx2_supported();
const Ops& ops_for(Backend backend);  // throws invalid-argument if unsupported here
Backend active_backend();
void set_backend(Backend backend);    // throws invalid-argument if unsupported here
const Ops& active();
std::string_view backend_name(Backend backend);

}  // namespace dpmeter::kernels
