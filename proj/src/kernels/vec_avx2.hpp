#pragma once

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

// Width-4 lane type over __m256d. Mirrors vec_scalar.hpp operation for
// operation; the shared transform templates instantiate against either.
// This header must only be included from TUs compiled with -mavx2 -mfma.

namespace dpmeter::kernels {

struct VecD4 {
  __m256d v;
  static constexpr std::size_t kWidth = 4;
  static VecD4 load(const double* p) { return {_mm256_loadu_pd(p)}; }
  void store(double* p) const { _mm256_storeu_pd(p, v); }
  static VecD4 set1(double x) { return {_mm256_set1_pd(x)}; }
};

struct BitsD4 {
  __m256i b;
};

struct MaskD4 {
  __m256d m;
};

inline VecD4 operator+(VecD4 a, VecD4 b) { return {_mm256_add_pd(a.v, b.v)}; }
inline VecD4 operator-(VecD4 a, VecD4 b) { return {_mm256_sub_pd(a.v, b.v)}; }
inline VecD4 operator*(VecD4 a, VecD4 b) { return {_mm256_mul_pd(a.v, b.v)}; }
inline VecD4 operator/(VecD4 a, VecD4 b) { return {_mm256_div_pd(a.v, b.v)}; }

inline VecD4 vfma(VecD4 a, VecD4 b, VecD4 c) { return {_mm256_fmadd_pd(a.v, b.v, c.v)}; }
inline VecD4 vabs(VecD4 a) { return {_mm256_andnot_pd(_mm256_set1_pd(-0.0), a.v)}; }
inline VecD4 vneg(VecD4 a) { return {_mm256_xor_pd(a.v, _mm256_set1_pd(-0.0))}; }
inline VecD4 vsqrt(VecD4 a) { return {_mm256_sqrt_pd(a.v)}; }
inline VecD4 vfloor(VecD4 a) { return {_mm256_floor_pd(a.v)}; }
inline VecD4 vceil(VecD4 a) { return {_mm256_ceil_pd(a.v)}; }
inline VecD4 vround_ne(VecD4 a) {
  return {_mm256_round_pd(a.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC)};
}

inline MaskD4 vgt(VecD4 a, VecD4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)}; }
inline MaskD4 vge(VecD4 a, VecD4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GE_OQ)}; }
inline MaskD4 vle(VecD4 a, VecD4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ)}; }
inline MaskD4 veq(VecD4 a, VecD4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_EQ_OQ)}; }
inline MaskD4 vor(MaskD4 a, MaskD4 b) { return {_mm256_or_pd(a.m, b.m)}; }
// blendv keys on the sign bit, which cmp results set lane-wide.
inline VecD4 vselect(MaskD4 m, VecD4 a, VecD4 b) { return {_mm256_blendv_pd(b.v, a.v, m.m)}; }

inline VecD4 vxor_sign(VecD4 x, VecD4 s) {
  return {_mm256_xor_pd(x.v, _mm256_and_pd(s.v, _mm256_set1_pd(-0.0)))};
}

inline BitsD4 vbits(VecD4 a) { return {_mm256_castpd_si256(a.v)}; }
inline VecD4 vfrombits(BitsD4 a) { return {_mm256_castsi256_pd(a.b)}; }
inline BitsD4 vshr52(BitsD4 a) { return {_mm256_srli_epi64(a.b, 52)}; }
inline BitsD4 vor_u64(BitsD4 a, std::uint64_t c) {
  return {_mm256_or_si256(a.b, _mm256_set1_epi64x(static_cast<long long>(c)))};
}
inline BitsD4 vand_u64(BitsD4 a, std::uint64_t c) {
  return {_mm256_and_si256(a.b, _mm256_set1_epi64x(static_cast<long long>(c)))};
}

}  // namespace dpmeter::kernels
