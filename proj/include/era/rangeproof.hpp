#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/errors.hpp"
#include "era/paillier.hpp"
#include "era/rng.hpp"

// Privacy-preserving "x < 2^t" proofs over Paillier ciphertexts, and the
// x1 >= x2 reduction built from three of them.
//
// A test set holds E(2^0), ..., E(2^(t-1)) in shuffled order. To show that
// C = E(x, r_x) is in range, the prover picks the entries whose powers sum to
// x and publishes r* = r_x^-1 * prod(r_i). The verifier checks
//
//     C^-1 * prod(selected) == E(0, r*) == r*^n   (mod n^2)
//
// which holds exactly when the selected plaintexts sum to x.
namespace era::rangeproof {

using paillier::Ciphertext;
using paillier::PublicKey;
using paillier::Randomness;

using TestSetId = std::uint32_t;

struct TestSetPublic {
  TestSetId id = 0;
  std::vector<Ciphertext> entries;
};

// Prover-side opening of one entry.
struct PowerOpening {
  std::size_t position = 0;  // index into the public entries
  mpz_class randomness;
};

struct TestSet {
  TestSetPublic pub;
  std::vector<PowerOpening> powers;  // powers[i] opens E(2^i)

  unsigned t() const { return static_cast<unsigned>(powers.size()); }
};

struct RangeProof {
  TestSetId test_set = 0;
  std::vector<Ciphertext> selected;
  mpz_class r_star;
};

inline void check_parameters(const PublicKey& key, unsigned t) {
  if (t == 0) throw ParameterError("rangeproof: t must be positive");
  // 2^t < n/2  <=>  2^(t+1) < n
  if (pow2(t + 1) >= key.n()) throw ParameterError("rangeproof: need 2^t < n/2");
}

template <RandomSource R>
TestSet gen_test_set(const PublicKey& key, unsigned t, R& rng, TestSetId id) {
  check_parameters(key, t);
  std::vector<mpz_class> randomness;
  randomness.reserve(t);
  for (unsigned i = 0; i < t; ++i) {
    randomness.push_back(paillier::sample_randomness(key, rng).r);
  }
  std::vector<std::size_t> order(t);
  for (std::size_t i = 0; i < t; ++i) order[i] = i;
  shuffle(order, rng);  // order[position] = power index

  TestSet ts;
  ts.pub.id = id;
  ts.pub.entries.resize(t);
  ts.powers.resize(t);
  for (std::size_t position = 0; position < t; ++position) {
    std::size_t power = order[position];
    ts.pub.entries[position] = paillier::encrypt(
        key, paillier::Plaintext{pow2(static_cast<unsigned>(power))},
        Randomness{randomness[power]});
    ts.powers[power] = PowerOpening{position, randomness[power]};
  }
  return ts;
}

// Exponents of the binary expansion, ascending. Empty for zero.
inline std::vector<unsigned> decompose(const mpz_class& x) {
  if (x < 0) throw DomainError("decompose: negative value");
  std::vector<unsigned> out;
  unsigned bits = bit_length(x);
  for (unsigned i = 0; i < bits; ++i) {
    if (mpz_tstbit(x.get_mpz_t(), i)) out.push_back(i);
  }
  return out;
}

inline RangeProof prove_range(const mpz_class& x, const Randomness& r_x,
                              const TestSet& ts, const PublicKey& key) {
  if (x < 0 || x >= pow2(ts.t())) {
    throw UnprovableError("rangeproof: value is not below 2^t");
  }
  auto r_inv = invert(r_x.r, key.n());
  if (!r_inv) throw RandomnessError("rangeproof: r_x not invertible mod n");
  RangeProof proof;
  proof.test_set = ts.pub.id;
  proof.r_star = *r_inv;
  for (unsigned e : decompose(x)) {
    const PowerOpening& opening = ts.powers[e];
    proof.selected.push_back(ts.pub.entries[opening.position]);
    proof.r_star = proof.r_star * opening.randomness % key.n();
  }
  return proof;
}

enum class RangeVerdict {
  kAccept,
  kWrongTestSet,   // proof names a different test set
  kTooMany,        // more than t selections
  kNotMember,      // a selected ciphertext is not in the test set
  kDuplicate,      // the same entry selected twice
  kBadRandomness,  // r* not a unit mod n
  kEquationFails,  // C^-1 * prod(selected) != r*^n
};

inline const char* to_string(RangeVerdict v) {
  switch (v) {
    case RangeVerdict::kAccept: return "accept";
    case RangeVerdict::kWrongTestSet: return "wrong test set";
    case RangeVerdict::kTooMany: return "too many selected ciphertexts";
    case RangeVerdict::kNotMember: return "selected ciphertext not in test set";
    case RangeVerdict::kDuplicate: return "duplicate selection";
    case RangeVerdict::kBadRandomness: return "r* not in Z_n^*";
    case RangeVerdict::kEquationFails: return "range equation does not hold";
  }
  return "unknown";
}

inline RangeVerdict verify_range(const Ciphertext& c, const RangeProof& proof,
                                 const TestSetPublic& ts, unsigned t,
                                 const PublicKey& key) {
  if (proof.test_set != ts.id) return RangeVerdict::kWrongTestSet;
  if (proof.selected.size() > t || ts.entries.size() != t) return RangeVerdict::kTooMany;
  std::set<mpz_class> members;
  for (const auto& e : ts.entries) members.insert(e.value);
  std::set<mpz_class> used;
  for (const auto& s : proof.selected) {
    if (s.key_tag != key.tag() || members.count(s.value) == 0) return RangeVerdict::kNotMember;
    if (!used.insert(s.value).second) return RangeVerdict::kDuplicate;
  }
  if (!paillier::is_unit(proof.r_star, key.n())) return RangeVerdict::kBadRandomness;
  if (!paillier::is_unit(c.value, key.n_sq())) return RangeVerdict::kEquationFails;

  Ciphertext lhs = paillier::ct_inverse(c, key);
  for (const auto& s : proof.selected) lhs = paillier::ct_mul(lhs, s, key);
  mpz_class rhs = powm(proof.r_star, key.n(), key.n_sq());
  return lhs.value == rhs ? RangeVerdict::kAccept : RangeVerdict::kEquationFails;
}

// Three range proofs: x1, x2 and (x1 - x2) mod n, each on its own test set.
struct ComparisonProof {
  RangeProof x1;
  RangeProof x2;
  RangeProof diff;
};

// E(x1 - x2 mod n) derived from the two commitments alone.
inline Ciphertext difference_ciphertext(const Ciphertext& c1, const Ciphertext& c2,
                                        const PublicKey& key) {
  return paillier::ct_mul(c1, paillier::ct_inverse(c2, key), key);
}

struct TestSetTriple {
  const TestSet* x1;
  const TestSet* x2;
  const TestSet* diff;
};

inline ComparisonProof prove_geq(const mpz_class& x1, const Randomness& r1,
                                 const mpz_class& x2, const Randomness& r2,
                                 const TestSetTriple& sets, const PublicKey& key) {
  if (sets.x1->pub.id == sets.x2->pub.id || sets.x1->pub.id == sets.diff->pub.id ||
      sets.x2->pub.id == sets.diff->pub.id) {
    throw ParameterError("prove_geq: each component needs its own test set");
  }
  mpz_class d = mod(x1 - x2, key.n());
  auto r2_inv = invert(r2.r, key.n());
  if (!r2_inv) throw RandomnessError("prove_geq: r2 not invertible mod n");
  Randomness r_d{r1.r * *r2_inv % key.n()};
  return ComparisonProof{prove_range(x1, r1, *sets.x1, key),
                         prove_range(x2, r2, *sets.x2, key),
                         prove_range(d, r_d, *sets.diff, key)};
}

enum class Inequality { kNone, kX1, kX2, kDifference };

struct GeqVerdict {
  bool accepted = false;
  Inequality failed = Inequality::kNone;
  RangeVerdict detail = RangeVerdict::kAccept;
};

struct TestSetPublicTriple {
  const TestSetPublic* x1;
  const TestSetPublic* x2;
  const TestSetPublic* diff;
};

inline GeqVerdict verify_geq(const Ciphertext& c1, const Ciphertext& c2,
                             const ComparisonProof& proof,
                             const TestSetPublicTriple& sets, unsigned t,
                             const PublicKey& key) {
  if (sets.x1->id == sets.x2->id || sets.x1->id == sets.diff->id ||
      sets.x2->id == sets.diff->id) {
    return GeqVerdict{false, Inequality::kDifference, RangeVerdict::kWrongTestSet};
  }
  if (auto v = verify_range(c1, proof.x1, *sets.x1, t, key); v != RangeVerdict::kAccept) {
    return GeqVerdict{false, Inequality::kX1, v};
  }
  if (auto v = verify_range(c2, proof.x2, *sets.x2, t, key); v != RangeVerdict::kAccept) {
    return GeqVerdict{false, Inequality::kX2, v};
  }
  Ciphertext d = difference_ciphertext(c1, c2, key);
  if (auto v = verify_range(d, proof.diff, *sets.diff, t, key); v != RangeVerdict::kAccept) {
    return GeqVerdict{false, Inequality::kDifference, v};
  }
  return GeqVerdict{true, Inequality::kNone, RangeVerdict::kAccept};
}

}  // namespace era::rangeproof
