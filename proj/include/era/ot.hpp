#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/errors.hpp"
#include "era/group.hpp"
#include "era/rng.hpp"

// 1-out-of-z oblivious transfer over the order-rho subgroup:
//   receiver:  y = g^r h^alpha
//   sender:    xi_i = (g^k_i, m_i (y / h^i)^k_i),  i = 1..z
//   receiver:  m_alpha = b / a^r
namespace era::ot {

// What the receiver sends. Deliberately carries nothing but y.
struct Request {
  mpz_class y;
};

// What the receiver keeps.
struct ReceiverSecret {
  mpz_class r;
  std::size_t alpha = 0;  // 1-based
};

struct Query {
  Request request;
  ReceiverSecret secret;
};

struct Pair {
  mpz_class a;
  mpz_class b;
};

struct Batch {
  std::vector<Pair> xi;
};

inline Query query_with_secret(std::size_t alpha, std::size_t z, mpz_class r,
                               const GroupParams& gp) {
  if (alpha < 1 || alpha > z) throw DomainError("ot: choice index outside [1, z]");
  mpz_class y = powm(gp.g, r, gp.p) * powm(gp.h, mpz_class(alpha), gp.p) % gp.p;
  return Query{Request{std::move(y)}, ReceiverSecret{std::move(r), alpha}};
}

template <RandomSource R>
Query query(std::size_t alpha, std::size_t z, const GroupParams& gp, R& rng) {
  return query_with_secret(alpha, z, rng.uniform_below(gp.rho), gp);
}

// Sender reply with caller-chosen exponents (one per message).
inline Batch respond_with_exponents(const mpz_class& y,
                                    std::span<const mpz_class> messages,
                                    std::span<const mpz_class> exponents,
                                    const GroupParams& gp) {
  if (y <= 0 || y >= gp.p) throw DomainError("ot: y is not in Z_p^*");
  if (exponents.size() != messages.size()) {
    throw DomainError("ot: one exponent per message required");
  }
  for (const auto& m : messages) {
    if (m < 1 || m >= gp.p) throw EncodingError("ot: message outside [1, p-1]");
  }
  const mpz_class h_inv = *invert(gp.h, gp.p);
  Batch batch;
  batch.xi.reserve(messages.size());
  mpz_class blind = y * h_inv % gp.p;  // y / h^i for i = 1
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const mpz_class& k = exponents[i];
    batch.xi.push_back(Pair{powm(gp.g, k, gp.p),
                            messages[i] * powm(blind, k, gp.p) % gp.p});
    blind = blind * h_inv % gp.p;
  }
  return batch;
}

template <RandomSource R>
Batch respond(const mpz_class& y, std::span<const mpz_class> messages,
              const GroupParams& gp, R& rng) {
  std::vector<mpz_class> exponents;
  exponents.reserve(messages.size());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    exponents.push_back(rng.uniform_below(gp.rho));
  }
  return respond_with_exponents(y, messages, exponents, gp);
}

inline mpz_class recover(const Pair& xi_alpha, const mpz_class& r,
                         const GroupParams& gp) {
  auto a_r_inv = invert(powm(xi_alpha.a, r, gp.p), gp.p);
  if (!a_r_inv) throw ProtocolError("ot: a is not invertible mod p");
  return xi_alpha.b * *a_r_inv % gp.p;
}

inline mpz_class recover(const Batch& batch, const ReceiverSecret& secret,
                         const GroupParams& gp) {
  if (secret.alpha < 1 || secret.alpha > batch.xi.size()) {
    throw ProtocolError("ot: batch does not cover the receiver's choice");
  }
  return recover(batch.xi[secret.alpha - 1], secret.r, gp);
}

}  // namespace era::ot
