#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "era/errors.hpp"
#include "era/rng.hpp"

namespace era {

// Canonical wire form for every big integer in the project: lowercase hex,
// big-endian, no leading zeros, "0" for zero.
inline std::string hex(const mpz_class& v) {
  if (v < 0) throw DomainError("hex: negative integer");
  return v.get_str(16);
}

inline std::optional<mpz_class> parse_hex(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.size() > 1 && text.front() == '0') return std::nullopt;
  for (char c : text) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) return std::nullopt;
  }
  mpz_class out;
  if (out.set_str(std::string(text), 16) != 0) return std::nullopt;
  return out;
}

inline unsigned bit_length(const mpz_class& v) {
  if (v == 0) return 0;
  return static_cast<unsigned>(mpz_sizeinbase(v.get_mpz_t(), 2));
}

inline mpz_class powm(const mpz_class& base, const mpz_class& exp,
                      const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

inline std::optional<mpz_class> invert(const mpz_class& v, const mpz_class& mod) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t()) == 0) {
    return std::nullopt;
  }
  return out;
}

inline mpz_class gcd(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline mpz_class mod(const mpz_class& v, const mpz_class& m) {
  mpz_class out;
  mpz_mod(out.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
  return out;
}

inline mpz_class pow2(unsigned e) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, e);
  return out;
}

namespace detail {

inline const std::vector<unsigned>& small_primes() {
  static const std::vector<unsigned> primes = [] {
    constexpr unsigned kLimit = 2000;
    std::vector<bool> composite(kLimit, false);
    std::vector<unsigned> out;
    for (unsigned i = 2; i < kLimit; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (unsigned j = i * i; j < kLimit; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

// One Miller-Rabin round with witness a; n odd, n - 1 = d * 2^s.
inline bool mr_round(const mpz_class& n, const mpz_class& d, unsigned s,
                     const mpz_class& a) {
  mpz_class n1 = n - 1;
  mpz_class x = powm(a, d, n);
  if (x == 1 || x == n1) return true;
  for (unsigned i = 1; i < s; ++i) {
    x = x * x % n;
    if (x == n1) return true;
    if (x == 1) return false;
  }
  return false;
}

}  // namespace detail

inline constexpr unsigned kMillerRabinRounds = 64;

// Trial division by the small-prime table, then `rounds` Miller-Rabin rounds
// with bases drawn from rng. Exact (trial division only) below 2000^2.
template <RandomSource R>
bool is_probable_prime(const mpz_class& n, R& rng,
                       unsigned rounds = kMillerRabinRounds) {
  if (n < 2) return false;
  for (unsigned p : detail::small_primes()) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  mpz_class limit = detail::small_primes().back();
  if (n < limit * limit) return true;
  mpz_class d = n - 1;
  unsigned s = 0;
  while (mpz_even_p(d.get_mpz_t())) {
    d >>= 1;
    ++s;
  }
  // Base 2 first: it rejects nearly every composite that survives the sieve.
  if (!detail::mr_round(n, d, s, mpz_class(2))) return false;
  mpz_class span = n - 3;
  for (unsigned i = 1; i < rounds; ++i) {
    mpz_class a = rng.uniform_below(span) + 2;
    if (!detail::mr_round(n, d, s, a)) return false;
  }
  return true;
}

// Random prime of exactly `bits` bits with the top two bits set, so that the
// product of two such primes has exactly 2*bits bits.
template <RandomSource R>
mpz_class random_prime(unsigned bits, R& rng, unsigned max_attempts = 1u << 20) {
  if (bits < 3) throw GenerationError("random_prime: need at least 3 bits");
  for (unsigned attempt = 0; attempt < max_attempts; ++attempt) {
    mpz_class candidate = rng.uniform_below(pow2(bits - 2));
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    if (bit_length(candidate) != bits) continue;
    if (is_probable_prime(candidate, rng)) return candidate;
  }
  throw GenerationError("random_prime: no prime found in bounded attempts");
}

// Safe prime p = 2q + 1 of exactly `bits` bits. Scans upward from a random odd
// q with an incremental small-prime sieve on both q and 2q + 1.
template <RandomSource R>
mpz_class random_safe_prime(unsigned bits, R& rng,
                            unsigned max_restarts = 4096) {
  if (bits < 3) throw GenerationError("random_safe_prime: need at least 3 bits");
  const auto& primes = detail::small_primes();
  const mpz_class q_lo = pow2(bits - 2);
  const mpz_class q_hi = pow2(bits - 1);  // q < q_hi keeps p at `bits` bits

  if (bits <= 20) {
    // Tiny groups (tests): enumerate the whole range from a random start.
    std::uint64_t lo = q_lo.get_ui();
    std::uint64_t width = q_hi.get_ui() - lo;
    std::uint64_t start = rng.uniform_u64(width);
    for (std::uint64_t i = 0; i < width; ++i) {
      mpz_class q = lo + (start + i) % width;
      mpz_class p = 2 * q + 1;
      if (bit_length(p) != bits) continue;
      if (is_probable_prime(q, rng) && is_probable_prime(p, rng)) return p;
    }
    throw GenerationError("random_safe_prime: no safe prime of that size");
  }

  constexpr unsigned kWindow = 1u << 16;
  for (unsigned restart = 0; restart < max_restarts; ++restart) {
    mpz_class q0 = q_lo + rng.uniform_below(q_lo);
    mpz_setbit(q0.get_mpz_t(), 0);
    std::vector<unsigned> residue(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
      residue[i] = static_cast<unsigned>(mpz_fdiv_ui(q0.get_mpz_t(), primes[i]));
    }
    for (unsigned delta = 0; delta < kWindow; delta += 2) {
      bool sieved = false;
      for (std::size_t i = 1; i < primes.size(); ++i) {
        unsigned sp = primes[i];
        unsigned rq = (residue[i] + delta) % sp;
        // q divisible by sp, or 2q + 1 divisible by sp.
        if (rq == 0 || (2 * rq + 1) % sp == 0) {
          sieved = true;
          break;
        }
      }
      if (sieved) continue;
      mpz_class q = q0 + delta;
      if (q >= q_hi) break;
      mpz_class p = 2 * q + 1;
      if (powm(mpz_class(2), p - 1, p) != 1) continue;
      if (is_probable_prime(q, rng) && is_probable_prime(p, rng)) return p;
    }
  }
  throw GenerationError("random_safe_prime: no safe prime found in bounded attempts");
}

}  // namespace era
