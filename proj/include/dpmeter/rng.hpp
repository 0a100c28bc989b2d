#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace dpmeter {

// Deterministic random source. mt19937_64 is bit-exact across platforms by
// the C++ standard; std::* distributions are not, so every draw shape used by
// the project is implemented here or in the kernels, never via <random>
// distribution objects.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double strictly inside (0, 1). The low bit is forced on after the
  // 12-bit shift, so 0 is impossible, the value is an exact multiple of 2^-52,
  // and 1 is unreachable. Safe to feed into log().
  double unit_open() {
    return static_cast<double>((next_u64() >> 12) | 1u) * 0x1p-52;
  }

  void fill_unit_open(std::span<double> out) {
    for (double& v : out) v = unit_open();
  }

  // Uniform integer in [0, bound). Rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 eng_;
};

// Stream derivation: first 8 bytes (big-endian) of SHA-256 over the
// big-endian master seed followed by the tag. Distinct tags give independent,
// reproducible streams from one master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace dpmeter
