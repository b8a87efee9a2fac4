#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/errors.hpp"
#include "era/hash.hpp"
#include "era/rng.hpp"

namespace era::paillier {

// Identifies the key a ciphertext was produced under. Derived from n.
using KeyTag = std::uint64_t;

inline KeyTag tag_of(const mpz_class& n) {
  Digest d = sha256(hex(n));
  KeyTag tag = 0;
  for (int i = 0; i < 8; ++i) tag = (tag << 8) | d[i];
  return tag;
}

struct Plaintext {
  mpz_class m;
};

struct Randomness {
  mpz_class r;
};

class PublicKey {
 public:
  PublicKey() = default;
  explicit PublicKey(mpz_class n) : n_(std::move(n)), n_sq_(n_ * n_), tag_(tag_of(n_)) {}

  const mpz_class& n() const { return n_; }
  const mpz_class& n_sq() const { return n_sq_; }
  KeyTag tag() const { return tag_; }
  unsigned bits() const { return bit_length(n_); }

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.n_ == b.n_; }

 private:
  mpz_class n_;
  mpz_class n_sq_;
  KeyTag tag_ = 0;
};

struct Ciphertext {
  mpz_class value;
  KeyTag key_tag = 0;

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) {
    return a.key_tag == b.key_tag && a.value == b.value;
  }
};

class KeyPair {
 public:
  // Validates every key-pair invariant; throws KeyError otherwise.
  KeyPair(mpz_class p, mpz_class q) : p_(std::move(p)), q_(std::move(q)) {
    if (p_ == q_) throw KeyError("paillier: p and q must differ");
    Drbg check_rng("paillier/keypair-check/" + hex(p_) + "/" + hex(q_));
    if (!is_probable_prime(p_, check_rng) || !is_probable_prime(q_, check_rng)) {
      throw KeyError("paillier: p and q must be prime");
    }
    public_ = PublicKey(p_ * q_);
    phi_ = (p_ - 1) * (q_ - 1);
    if (gcd(public_.n(), phi_) != 1) throw KeyError("paillier: gcd(n, phi) != 1");
    phi_inv_mod_n_ = *invert(phi_, public_.n());
    n_inv_mod_phi_ = *invert(public_.n(), phi_);
  }

  const PublicKey& public_key() const { return public_; }
  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  const mpz_class& n() const { return public_.n(); }
  const mpz_class& n_sq() const { return public_.n_sq(); }
  const mpz_class& phi() const { return phi_; }
  const mpz_class& phi_inv_mod_n() const { return phi_inv_mod_n_; }
  const mpz_class& n_inv_mod_phi() const { return n_inv_mod_phi_; }

 private:
  mpz_class p_, q_;
  PublicKey public_;
  mpz_class phi_;
  mpz_class phi_inv_mod_n_;
  mpz_class n_inv_mod_phi_;
};

// Prime source that hands back a fixed list; used for textbook test vectors.
class FixedPrimes {
 public:
  FixedPrimes(mpz_class p, mpz_class q) : primes_{std::move(p), std::move(q)} {}
  mpz_class operator()(unsigned /*bits*/) {
    if (next_ >= 2) throw GenerationError("paillier: fixed prime source exhausted");
    return primes_[next_++];
  }

 private:
  mpz_class primes_[2];
  int next_ = 0;
};

template <RandomSource R>
class RandomPrimes {
 public:
  explicit RandomPrimes(R& rng) : rng_(rng) {}
  mpz_class operator()(unsigned bits) { return random_prime(bits, rng_); }

 private:
  R& rng_;
};

inline constexpr unsigned kMaxKeygenAttempts = 64;

// n has exactly key_bits bits; p and q get half each. Sizes below 16 bits are
// accepted so that textbook vectors (n = 35, n = 143) go through the same path.
template <class PrimeSource>
  requires std::invocable<PrimeSource&, unsigned>
KeyPair keygen(unsigned key_bits, PrimeSource&& source) {
  if (key_bits < 4) throw GenerationError("paillier: key_bits too small");
  unsigned p_bits = key_bits / 2;
  unsigned q_bits = key_bits - p_bits;
  for (unsigned attempt = 0; attempt < kMaxKeygenAttempts; ++attempt) {
    mpz_class p = source(p_bits);
    mpz_class q = source(q_bits);
    if (p == q) continue;
    if (bit_length(p * q) != key_bits) continue;
    if (gcd(p * q, (p - 1) * (q - 1)) != 1) continue;
    return KeyPair(std::move(p), std::move(q));
  }
  throw GenerationError("paillier: key generation failed after bounded retries");
}

inline bool is_unit(const mpz_class& v, const mpz_class& modulus) {
  return v > 0 && v < modulus && gcd(v, modulus) == 1;
}

// C = (1 + m n) * r^n mod n^2
inline Ciphertext encrypt(const PublicKey& key, const Plaintext& pt,
                          const Randomness& rnd) {
  const mpz_class& n = key.n();
  if (pt.m < 0 || pt.m >= n) throw DomainError("paillier: plaintext outside [0, n)");
  if (!is_unit(rnd.r, n)) throw RandomnessError("paillier: randomness not in Z_n^*");
  mpz_class value = (1 + pt.m * n) % key.n_sq();
  value = value * powm(rnd.r, n, key.n_sq()) % key.n_sq();
  return Ciphertext{std::move(value), key.tag()};
}

// Production sampling: r uniform in [2, n) with gcd(r, n) = 1.
template <RandomSource R>
Randomness sample_randomness(const PublicKey& key, R& rng) {
  for (;;) {
    mpz_class r = rng.uniform_below(key.n() - 2) + 2;
    if (gcd(r, key.n()) == 1) return Randomness{std::move(r)};
  }
}

inline void require_ciphertext(const PublicKey& key, const Ciphertext& c,
                               const char* what) {
  if (c.key_tag != key.tag()) throw KeyError(std::string(what) + ": ciphertext under a different key");
}

// m = L(C^phi mod n^2) * phi^-1 mod n, L(x) = (x - 1) / n
inline Plaintext decrypt_with_phi(const Ciphertext& c, const KeyPair& key) {
  require_ciphertext(key.public_key(), c, "decrypt_with_phi");
  if (!is_unit(c.value, key.n_sq())) throw DecryptionError("paillier: not a valid ciphertext");
  mpz_class u = powm(c.value, key.phi(), key.n_sq());
  mpz_class l = (u - 1) / key.n();
  return Plaintext{l * key.phi_inv_mod_n() % key.n()};
}

// m = ((C * r^-n mod n^2) - 1) / n, which only divides exactly for the r
// used at encryption.
inline Plaintext decrypt_with_r(const Ciphertext& c, const Randomness& rnd,
                                const PublicKey& key) {
  require_ciphertext(key, c, "decrypt_with_r");
  if (!is_unit(c.value, key.n_sq())) throw DecryptionError("paillier: not a valid ciphertext");
  if (!is_unit(rnd.r, key.n())) throw RandomnessError("paillier: randomness not in Z_n^*");
  mpz_class rn = powm(rnd.r, key.n(), key.n_sq());
  mpz_class u = c.value * *invert(rn, key.n_sq()) % key.n_sq();
  mpz_class numer = u - 1;
  if (!mpz_divisible_p(numer.get_mpz_t(), key.n().get_mpz_t())) {
    throw ConsistencyError("paillier: randomness does not open this ciphertext");
  }
  mpz_class m = numer / key.n();
  if (m < 0 || m >= key.n()) throw ConsistencyError("paillier: opened value out of range");
  return Plaintext{std::move(m)};
}

// r = C^(n^-1 mod phi) mod n
inline Randomness recover_random(const Ciphertext& c, const KeyPair& key) {
  require_ciphertext(key.public_key(), c, "recover_random");
  if (!is_unit(c.value, key.n_sq())) throw DecryptionError("paillier: not a valid ciphertext");
  return Randomness{powm(c.value % key.n(), key.n_inv_mod_phi(), key.n())};
}

// Multiplicative inverse mod n^2: an encryption of (n - m) mod n under r^-1.
inline Ciphertext ct_inverse(const Ciphertext& c, const PublicKey& key) {
  require_ciphertext(key, c, "ct_inverse");
  auto inv = invert(c.value, key.n_sq());
  if (!inv || c.value <= 0 || c.value >= key.n_sq()) {
    throw DomainError("paillier: ciphertext not invertible mod n^2");
  }
  return Ciphertext{std::move(*inv), key.tag()};
}

// Homomorphic addition of the plaintexts.
inline Ciphertext ct_mul(const Ciphertext& a, const Ciphertext& b,
                         const PublicKey& key) {
  if (a.key_tag != b.key_tag || a.key_tag != key.tag()) {
    throw KeyError("paillier: ct_mul across different keys");
  }
  return Ciphertext{a.value * b.value % key.n_sq(), key.tag()};
}

// Wraps a raw integer read from the wire as a ciphertext under `key`.
inline Ciphertext adopt(const PublicKey& key, mpz_class value) {
  return Ciphertext{std::move(value), key.tag()};
}

}  // namespace era::paillier
