#pragma once

#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "era/errors.hpp"
#include "era/hash.hpp"

namespace era {

// Anything that can hand out uniform integers. Protocol code is written
// against this so tests can script exact exponents and randomness.
template <class R>
concept RandomSource = requires(R& rng, const mpz_class& bound, std::uint64_t n) {
  { rng.uniform_below(bound) } -> std::same_as<mpz_class>;
  { rng.uniform_u64(n) } -> std::convertible_to<std::uint64_t>;
};

// SHA-256 in counter mode. Deterministic for a given seed, which is what makes
// whole auction runs reproducible; `fork` derives independent child streams so
// that per-party randomness does not depend on call order elsewhere.
class Drbg {
 public:
  explicit Drbg(std::string_view seed) : key_(sha256(seed)) {}

  static Drbg from_entropy() {
    std::array<unsigned char, 32> seed{};
    if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) {
      throw GenerationError("system entropy source unavailable");
    }
    return Drbg(std::string_view(reinterpret_cast<const char*>(seed.data()),
                                 seed.size()));
  }

  Drbg fork(std::string_view label) const {
    std::string material(reinterpret_cast<const char*>(key_.data()),
                         key_.size());
    material.append("/fork/");
    material.append(label);
    return Drbg(material);
  }

  void fill(std::span<unsigned char> out) {
    std::size_t written = 0;
    while (written < out.size()) {
      if (available_ == 0) refill();
      std::size_t take = std::min(available_, out.size() - written);
      std::memcpy(out.data() + written,
                  block_.data() + (block_.size() - available_), take);
      available_ -= take;
      written += take;
    }
  }

  std::uint64_t next_u64() {
    std::array<unsigned char, 8> b{};
    fill(b);
    std::uint64_t v = 0;
    for (unsigned char c : b) v = (v << 8) | c;
    return v;
  }

  // Uniform in [0, bound). bound must be positive.
  std::uint64_t uniform_u64(std::uint64_t bound) {
    if (bound == 0) throw DomainError("uniform_u64: empty range");
    std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  mpz_class random_bits(unsigned bits) {
    if (bits == 0) return 0;
    std::vector<unsigned char> buf((bits + 7) / 8);
    fill(buf);
    unsigned spare = static_cast<unsigned>(buf.size() * 8 - bits);
    buf[0] &= static_cast<unsigned char>(0xffu >> spare);
    return bytes_to_mpz(buf);
  }

  // Uniform in [0, bound) by rejection on the bit length of bound.
  mpz_class uniform_below(const mpz_class& bound) {
    if (bound <= 0) throw DomainError("uniform_below: empty range");
    unsigned bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
    for (;;) {
      mpz_class v = random_bits(bits);
      if (v < bound) return v;
    }
  }

 private:
  void refill() {
    std::array<unsigned char, 40> material{};
    std::memcpy(material.data(), key_.data(), key_.size());
    for (int i = 0; i < 8; ++i) {
      material[32 + i] = static_cast<unsigned char>(counter_ >> (56 - 8 * i));
    }
    ++counter_;
    block_ = sha256(material);
    available_ = block_.size();
  }

  Digest key_;
  Digest block_{};
  std::size_t available_ = 0;
  std::uint64_t counter_ = 0;
};

static_assert(RandomSource<Drbg>);

// Fisher-Yates with the library's own uniform draws, so a seeded shuffle is
// identical on every standard library.
template <class T, RandomSource R>
void shuffle(std::vector<T>& items, R& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_u64(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace era
