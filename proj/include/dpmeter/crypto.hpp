#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace dpmeter {

using Hash256 = std::array<std::uint8_t, 32>;

// SHA-256 of the given bytes (OpenSSL EVP under the hood).
Hash256 sha256(std::span<const std::uint8_t> data);

}  // namespace dpmeter
