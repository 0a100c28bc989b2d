#include "dpmeter/rng.hpp"

#include <vector>

#include "dpmeter/crypto.hpp"
#include "dpmeter/error.hpp"

namespace dpmeter {

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) fail(Errc::kInvalidArgument, "Rng::below bound must be positive");
  // Discard draws below 2^64 mod bound, then reduce; classic unbiased scheme.
  std::uint64_t min = (0 - bound) % bound;
  std::uint64_t x = next_u64();
  while (x < min) x = next_u64();
  return x % bound;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::vector<std::uint8_t> buf;
  buf.reserve(8 + tag.size());
  for (int i = 7; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(master >> (8 * i)));
  buf.insert(buf.end(), tag.begin(), tag.end());
  Hash256 h = sha256(buf);
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = out << 8 | h[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace dpmeter
