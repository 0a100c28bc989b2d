#pragma once

#include <cstddef>
#include <cstdint>

#include "dpmeter/kernels.hpp"
#include "vec_scalar.hpp"

// Shared per-element math for all backends. Every function here is a template
// over the lane type (VecD1 or VecD4), so scalar and AVX2 runs execute the
// same IEEE-754 operation sequence and produce bit-identical results. For the
// same reason the polynomial log and sincos below are used instead of libm:
// libm values may differ between builds, and FMA use must be explicit.
// TUs including this header are compiled with -ffp-contract=off.

namespace dpmeter::kernels {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kTwoPi = 6.28318530717958647693;
inline constexpr double kTwoOverPi = 6.36619772367581343076e-01;
inline constexpr double kPio2Hi = 1.57079632673412561417e+00;
inline constexpr double kPio2Lo = 6.07710050650619224932e-11;

// atanh series for log: ln(m) = 2z * (1 + s/3 + s^2/5 + ...), s = z^2.
inline constexpr double kLogC[10] = {
    1.0 / 3,  1.0 / 5,  1.0 / 7,  1.0 / 9,  1.0 / 11,
    1.0 / 13, 1.0 / 15, 1.0 / 17, 1.0 / 19, 1.0 / 21,
};
// Taylor tails: sin needs odd terms r^3..r^15, cos even terms r^4..r^16.
inline constexpr double kSinC[7] = {
    -1.0 / 6,        1.0 / 120,        -1.0 / 5040,         1.0 / 362880,
    -1.0 / 39916800, 1.0 / 6227020800, -1.0 / 1307674368000,
};
inline constexpr double kCosC[7] = {
    1.0 / 24,         -1.0 / 720,         1.0 / 40320,          -1.0 / 3628800,
    1.0 / 479001600,  -1.0 / 87178291200, 1.0 / 20922789888000,
};

inline constexpr std::uint64_t kMantMask = 0x000FFFFFFFFFFFFFull;
inline constexpr std::uint64_t kOneBits = 0x3FF0000000000000ull;
inline constexpr std::uint64_t kShiftedBits = 0x4330000000000000ull;  // 2^52
inline constexpr double kShiftedBias = 4503599627371519.0;            // 2^52 + 1023

// Natural log for positive, finite, normal x (all this project feeds it).
// Relative error a few ulp: exponent/mantissa split, mantissa folded into
// (1/sqrt2, sqrt2], atanh series, hi/lo ln2 recombination.
template <class V>
inline V vlog(V x) {
  auto bits = vbits(x);
  V e = vfrombits(vor_u64(vshr52(bits), kShiftedBits)) - V::set1(kShiftedBias);
  V m = vfrombits(vor_u64(vand_u64(bits, kMantMask), kOneBits));
  auto fold = vgt(m, V::set1(kSqrt2));
  m = vselect(fold, m * V::set1(0.5), m);
  e = e + vselect(fold, V::set1(1.0), V::set1(0.0));
  V z = (m - V::set1(1.0)) / (m + V::set1(1.0));
  V s = z * z;
  V p = V::set1(kLogC[9]);
  for (int i = 8; i >= 0; --i) p = vfma(p, s, V::set1(kLogC[i]));
  p = vfma(p, s, V::set1(1.0));
  V t = z * p;
  V lnm = t + t;
  return vfma(e, V::set1(kLn2Hi), vfma(e, V::set1(kLn2Lo), lnm));
}

template <class V>
struct SinCos {
  V sin, cos;
};

// Simultaneous sin/cos for theta in [0, 2*pi): Cody-Waite reduction by pi/2
// (quotient at most 4), Taylor kernels, branchless quadrant fixup.
template <class V>
inline SinCos<V> vsincos(V theta) {
  V q = vround_ne(theta * V::set1(kTwoOverPi));
  V r = vfma(q, V::set1(-kPio2Hi), theta);
  r = vfma(q, V::set1(-kPio2Lo), r);
  V s2 = r * r;

  V ps = V::set1(kSinC[6]);
  for (int i = 5; i >= 0; --i) ps = vfma(ps, s2, V::set1(kSinC[i]));
  V sin_r = vfma(r * s2, ps, r);

  V pc = V::set1(kCosC[6]);
  for (int i = 5; i >= 0; --i) pc = vfma(pc, s2, V::set1(kCosC[i]));
  V cos_r = vfma(s2 * s2, pc, vfma(s2, V::set1(-0.5), V::set1(1.0)));

  V qm = q - V::set1(4.0) * vfloor(q * V::set1(0.25));
  auto is1 = veq(qm, V::set1(1.0));
  auto is2 = veq(qm, V::set1(2.0));
  auto is3 = veq(qm, V::set1(3.0));
  auto swap = vor(is1, is3);
  V so = vselect(swap, cos_r, sin_r);
  V co = vselect(swap, sin_r, cos_r);
  so = vselect(vor(is2, is3), vneg(so), so);
  co = vselect(vor(is1, is2), vneg(co), co);
  return {so, co};
}

// Laplace(0, b) by inverse CDF: x = -b * sign(v) * ln(1 - 2|v|), v = u - 1/2.
template <class V>
inline V laplace_one(V u, V neg_scale) {
  V v = u - V::set1(0.5);
  V av = vabs(v);
  V l = vlog(V::set1(1.0) - (av + av));
  return neg_scale * vxor_sign(l, v);
}

// Two-sided geometric by inverse CDF. CDF(x) = alpha^-x / (1+alpha) for
// x < 0 and 1 - alpha^(x+1) / (1+alpha) for x >= 0; solving CDF(x) >= u gives
// x = -floor(ln(u(1+a))/ln a) on the negative side and
// x = ceil(ln((1-u)(1+a))/ln a - 1) on the positive side.
template <class V>
inline V geometric_one(V u, const GeometricParams& gp) {
  V la = V::set1(gp.log_alpha);
  V opa = V::set1(gp.one_plus_alpha);
  V neg = vneg(vfloor(vlog(u * opa) / la));
  V pos = vceil(vlog((V::set1(1.0) - u) * opa) / la - V::set1(1.0));
  V x = vselect(vge(u, V::set1(gp.thresh_pos)), pos, V::set1(0.0));
  return vselect(vle(u, V::set1(gp.thresh_neg)), neg, x);
}

template <class V>
inline void laplace_array(const double* u, std::size_t n, double scale, double* out) {
  const V nb = V::set1(-scale);
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth) laplace_one(V::load(u + i), nb).store(out + i);
  if constexpr (V::kWidth > 1) {
    const VecD1 nb1 = VecD1::set1(-scale);
    for (; i < n; ++i) laplace_one(VecD1::load(u + i), nb1).store(out + i);
  }
}

template <class V>
inline void gaussian_array(const double* u, std::size_t pairs, double sigma, double* out) {
  const double* ur = u;          // radius inputs
  const double* ua = u + pairs;  // angle inputs
  double* oc = out;
  double* os = out + pairs;
  std::size_t i = 0;
  for (; i + V::kWidth <= pairs; i += V::kWidth) {
    V r = vsqrt(vlog(V::load(ur + i)) * V::set1(-2.0)) * V::set1(sigma);
    SinCos<V> sc = vsincos(V::load(ua + i) * V::set1(kTwoPi));
    (r * sc.cos).store(oc + i);
    (r * sc.sin).store(os + i);
  }
  if constexpr (V::kWidth > 1) {
    for (; i < pairs; ++i) {
      VecD1 r = vsqrt(vlog(VecD1::load(ur + i)) * VecD1::set1(-2.0)) * VecD1::set1(sigma);
      SinCos<VecD1> sc = vsincos(VecD1::load(ua + i) * VecD1::set1(kTwoPi));
      (r * sc.cos).store(oc + i);
      (r * sc.sin).store(os + i);
    }
  }
}

template <class V>
inline void geometric_array(const double* u, std::size_t n, const GeometricParams& gp,
                            double* out) {
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth) geometric_one(V::load(u + i), gp).store(out + i);
  if constexpr (V::kWidth > 1) {
    for (; i < n; ++i) geometric_one(VecD1::load(u + i), gp).store(out + i);
  }
}

template <class V>
inline void add_array(const double* a, const double* b, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth) (V::load(a + i) + V::load(b + i)).store(out + i);
  if constexpr (V::kWidth > 1) {
    for (; i < n; ++i) out[i] = a[i] + b[i];
  }
}

template <class V>
inline void abs_diff_array(const double* a, const double* b, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + V::kWidth <= n; i += V::kWidth)
    vabs(V::load(a + i) - V::load(b + i)).store(out + i);
  if constexpr (V::kWidth > 1) {
    for (; i < n; ++i) out[i] = std::fabs(a[i] - b[i]);
  }
}

}  // namespace dpmeter::kernels
