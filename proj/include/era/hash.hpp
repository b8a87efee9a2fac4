#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace era {

using Digest = std::array<unsigned char, 32>;

inline Digest sha256(std::span<const unsigned char> data) {
  Digest out{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
  return out;
}

inline Digest sha256(std::string_view data) {
  return sha256(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(data.data()), data.size()));
}

inline std::string to_hex(std::span<const unsigned char> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

// Big-endian interpretation of a byte string.
inline mpz_class bytes_to_mpz(std::span<const unsigned char> bytes) {
  mpz_class out;
  if (!bytes.empty()) {
    mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return out;
}

// Expands (tag, counter) blocks of SHA-256 until `bits` bits are available and
// returns them as an integer. Used for hash-to-group and hash-to-scalar.
inline mpz_class hash_to_integer(std::string_view tag, unsigned bits) {
  std::string material;
  std::string buffer;
  for (std::uint32_t counter = 0; buffer.size() * 8 < bits; ++counter) {
    material.assign(tag);
    material.push_back('\0');
    material += std::to_string(counter);
    Digest d = sha256(material);
    buffer.append(reinterpret_cast<const char*>(d.data()), d.size());
  }
  mpz_class out = bytes_to_mpz(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(buffer.data()), buffer.size()));
  std::size_t excess = buffer.size() * 8 - bits;
  out >>= static_cast<mp_bitcnt_t>(excess);
  return out;
}

}  // namespace era
