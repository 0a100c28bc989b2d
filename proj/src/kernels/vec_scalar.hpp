#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

// Width-1 lane type. The reference backend instantiates the shared transform
// templates with this type; the AVX2 backend also uses it for loop tails, so
// tail elements take the exact same arithmetic path as full vectors.

namespace dpmeter::kernels {

struct VecD1 {
  double v;
  static constexpr std::size_t kWidth = 1;
  static VecD1 load(const double* p) { return {*p}; }
  void store(double* p) const { *p = v; }
  static VecD1 set1(double x) { return {x}; }
};

struct BitsD1 {
  std::uint64_t b;
};

using MaskD1 = bool;

inline VecD1 operator+(VecD1 a, VecD1 b) { return {a.v + b.v}; }
inline VecD1 operator-(VecD1 a, VecD1 b) { return {a.v - b.v}; }
inline VecD1 operator*(VecD1 a, VecD1 b) { return {a.v * b.v}; }
inline VecD1 operator/(VecD1 a, VecD1 b) { return {a.v / b.v}; }

inline VecD1 vfma(VecD1 a, VecD1 b, VecD1 c) { return {std::fma(a.v, b.v, c.v)}; }
inline VecD1 vabs(VecD1 a) { return {std::fabs(a.v)}; }
inline VecD1 vneg(VecD1 a) {
  return {std::bit_cast<double>(std::bit_cast<std::uint64_t>(a.v) ^ 0x8000000000000000ull)};
}
inline VecD1 vsqrt(VecD1 a) { return {std::sqrt(a.v)}; }
inline VecD1 vfloor(VecD1 a) { return {std::floor(a.v)}; }
inline VecD1 vceil(VecD1 a) { return {std::ceil(a.v)}; }
// Round to nearest even; process never touches the FP rounding mode.
inline VecD1 vround_ne(VecD1 a) { return {std::nearbyint(a.v)}; }

inline MaskD1 vgt(VecD1 a, VecD1 b) { return a.v > b.v; }
inline MaskD1 vge(VecD1 a, VecD1 b) { return a.v >= b.v; }
inline MaskD1 vle(VecD1 a, VecD1 b) { return a.v <= b.v; }
inline MaskD1 veq(VecD1 a, VecD1 b) { return a.v == b.v; }
inline MaskD1 vor(MaskD1 a, MaskD1 b) { return a || b; }
inline VecD1 vselect(MaskD1 m, VecD1 a, VecD1 b) { return m ? a : b; }

// x with its sign flipped wherever s is negative (sign-bit XOR).
inline VecD1 vxor_sign(VecD1 x, VecD1 s) {
  std::uint64_t xb = std::bit_cast<std::uint64_t>(x.v);
  std::uint64_t sb = std::bit_cast<std::uint64_t>(s.v) & 0x8000000000000000ull;
  return {std::bit_cast<double>(xb ^ sb)};
}

inline BitsD1 vbits(VecD1 a) { return {std::bit_cast<std::uint64_t>(a.v)}; }
inline VecD1 vfrombits(BitsD1 a) { return {std::bit_cast<double>(a.b)}; }
inline BitsD1 vshr52(BitsD1 a) { return {a.b >> 52}; }
inline BitsD1 vor_u64(BitsD1 a, std::uint64_t c) { return {a.b | c}; }
inline BitsD1 vand_u64(BitsD1 a, std::uint64_t c) { return {a.b & c}; }

}  // namespace dpmeter::kernels
