#pragma once

#include <string>
#include <string_view>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/errors.hpp"
#include "era/hash.hpp"
#include "era/rng.hpp"

namespace era {

// Order-rho subgroup of Z_p^* with p = 2 rho + 1. g and h both generate it;
// h is hashed into the group so nobody knows log_g h.
struct GroupParams {
  mpz_class p;
  mpz_class rho;
  mpz_class g;
  mpz_class h;

  friend bool operator==(const GroupParams&, const GroupParams&) = default;

  bool in_subgroup(const mpz_class& x) const {
    return x > 0 && x < p && powm(x, rho, p) == 1;
  }
};

namespace detail {

inline mpz_class hash_to_subgroup(std::string_view tag, const mpz_class& p,
                                  const mpz_class& avoid) {
  unsigned bits = bit_length(p) + 64;
  for (unsigned counter = 0;; ++counter) {
    std::string label = std::string(tag) + "/" + hex(p) + "/" + std::to_string(counter);
    mpz_class x = hash_to_integer(label, bits) % p;
    mpz_class y = x * x % p;
    if (y > 1 && y != avoid) return y;
  }
}

}  // namespace detail

// `bits` is the bit length of p (so rho has bits - 1 bits). Deterministic in
// seed.
inline GroupParams group_setup(unsigned bits, std::string_view seed) {
  if (bits < 5) throw GenerationError("group_setup: need at least 5 bits");
  Drbg rng(std::string("era/group/") + std::to_string(bits) + "/" + std::string(seed));
  GroupParams gp;
  gp.p = random_safe_prime(bits, rng);
  gp.rho = (gp.p - 1) / 2;
  gp.g = detail::hash_to_subgroup("era/group/g", gp.p, 0);
  gp.h = detail::hash_to_subgroup("era/group/h", gp.p, gp.g);
  return gp;
}

inline bool valid_params(const GroupParams& gp) {
  Drbg rng("era/group/validate");
  if (!is_probable_prime(gp.p, rng) || !is_probable_prime(gp.rho, rng)) return false;
  if (gp.p != 2 * gp.rho + 1) return false;
  if (gp.g == 1 || gp.h == 1 || gp.g == gp.h) return false;
  return gp.in_subgroup(gp.g) && gp.in_subgroup(gp.h);
}

}  // namespace era
