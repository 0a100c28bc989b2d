#include "dpmeter/crypto.hpp"

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace dpmeter {

Hash256 sha256(std::span<const std::uint8_t> data) {
  Hash256 out{};
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  unsigned int len = 0;
  if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("sha256 digest failed");
  }
  return out;
}

}  // namespace dpmeter
