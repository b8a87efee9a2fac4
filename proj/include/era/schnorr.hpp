#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/group.hpp"
#include "era/hash.hpp"
#include "era/rng.hpp"

namespace era::schnorr {

struct Signature {
  mpz_class e;
  mpz_class s;

  friend bool operator==(const Signature&, const Signature&) = default;

  // "<e>:<s>" in canonical hex.
  std::string encode() const { return hex(e) + ":" + hex(s); }

  static std::optional<Signature> decode(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    auto e = parse_hex(text.substr(0, colon));
    auto s = parse_hex(text.substr(colon + 1));
    if (!e || !s) return std::nullopt;
    return Signature{std::move(*e), std::move(*s)};
  }
};

class SigningKey {
 public:
  SigningKey() = default;
  SigningKey(const GroupParams& gp, mpz_class secret)
      : secret_(std::move(secret)), public_(powm(gp.g, secret_, gp.p)) {}

  template <RandomSource R>
  static SigningKey generate(const GroupParams& gp, R& rng) {
    return SigningKey(gp, rng.uniform_below(gp.rho - 1) + 1);
  }

  const mpz_class& secret() const { return secret_; }
  const mpz_class& public_key() const { return public_; }

 private:
  mpz_class secret_;
  mpz_class public_;
};

namespace detail {

inline mpz_class challenge(const GroupParams& gp, const mpz_class& commitment,
                           std::string_view message) {
  std::string material = "era/schnorr/" + hex(commitment) + "/";
  material.append(message);
  Digest d = sha256(material);
  return bytes_to_mpz(d) % gp.rho;
}

}  // namespace detail

// Deterministic nonce derived from the secret and the message, so identical
// runs produce identical logs.
inline Signature sign(const GroupParams& gp, const SigningKey& key,
                      std::string_view message) {
  Digest msg_digest = sha256(message);
  for (unsigned counter = 0;; ++counter) {
    std::string label = "era/schnorr/nonce/" + hex(key.secret()) + "/" +
                        to_hex(msg_digest) + "/" + std::to_string(counter);
    mpz_class k = hash_to_integer(label, bit_length(gp.rho) + 64) % gp.rho;
    if (k == 0) continue;
    mpz_class r = powm(gp.g, k, gp.p);
    mpz_class e = detail::challenge(gp, r, message);
    mpz_class s = (k + key.secret() * e) % gp.rho;
    return Signature{std::move(e), std::move(s)};
  }
}

inline bool verify(const GroupParams& gp, const mpz_class& public_key,
                   std::string_view message, const Signature& sig) {
  if (sig.e < 0 || sig.e >= gp.rho || sig.s < 0 || sig.s >= gp.rho) return false;
  if (public_key <= 1 || public_key >= gp.p) return false;
  // g^s * y^-e = g^k
  mpz_class r = powm(gp.g, sig.s, gp.p) *
                powm(public_key, (gp.rho - sig.e) % gp.rho, gp.p) % gp.p;
  return detail::challenge(gp, r, message) == sig.e;
}

}  // namespace era::schnorr
