#include <set>

#include <gtest/gtest.h>

#include "era/rangeproof.hpp"

using namespace era;
using namespace era::rangeproof;

namespace {

struct Fixture {
  Drbg rng{"rangeproof/fixture"};
  paillier::KeyPair key = paillier::keygen(64, paillier::RandomPrimes(rng));
  const paillier::PublicKey& pub() const { return key.public_key(); }
};

}  // namespace

TEST(RangeProof, Decompose) {
  EXPECT_TRUE(decompose(0).empty());
  EXPECT_EQ(decompose(13), (std::vector<unsigned>{0, 2, 3}));
  EXPECT_EQ(decompose(128), (std::vector<unsigned>{7}));
}

TEST(RangeProof, TestSetOpensToPowersOfTwo) {
  Fixture f;
  TestSet ts = gen_test_set(f.pub(), 8, f.rng, 1);
  ASSERT_EQ(ts.pub.entries.size(), 8u);
  std::set<std::size_t> positions;
  for (unsigned i = 0; i < 8; ++i) {
    const auto& op = ts.powers[i];
    positions.insert(op.position);
    EXPECT_EQ(paillier::decrypt_with_phi(ts.pub.entries[op.position], f.key).m, pow2(i));
    EXPECT_EQ(paillier::recover_random(ts.pub.entries[op.position], f.key).r, op.randomness);
  }
  EXPECT_EQ(positions.size(), 8u);
}

TEST(RangeProof, ParameterBounds) {
  Fixture f;
  EXPECT_THROW(check_parameters(f.pub(), 0), ParameterError);
  EXPECT_THROW(check_parameters(f.pub(), 63), ParameterError);
  EXPECT_NO_THROW(check_parameters(f.pub(), 60));
}

TEST(RangeProof, CompletenessAtT8) {
  Fixture f;
  TestSet ts = gen_test_set(f.pub(), 8, f.rng, 3);
  for (int x = 0; x < 256; ++x) {
    auto r = paillier::sample_randomness(f.pub(), f.rng);
    auto c = paillier::encrypt(f.pub(), paillier::Plaintext{x}, r);
    RangeProof p = prove_range(x, r, ts, f.pub());
    EXPECT_EQ(p.selected.size(), decompose(x).size());
    EXPECT_EQ(verify_range(c, p, ts.pub, 8, f.pub()), RangeVerdict::kAccept) << x;
  }
  auto r = paillier::sample_randomness(f.pub(), f.rng);
  EXPECT_THROW(prove_range(256, r, ts, f.pub()), UnprovableError);
}

TEST(RangeProof, RejectsMalformedProofs) {
  Fixture f;
  TestSet ts = gen_test_set(f.pub(), 8, f.rng, 1);
  TestSet other = gen_test_set(f.pub(), 8, f.rng, 2);
  auto r = paillier::sample_randomness(f.pub(), f.rng);
  auto c = paillier::encrypt(f.pub(), paillier::Plaintext{5}, r);
  RangeProof good = prove_range(5, r, ts, f.pub());

  EXPECT_EQ(verify_range(c, good, other.pub, 8, f.pub()), RangeVerdict::kWrongTestSet);

  RangeProof dup = good;
  dup.selected.push_back(dup.selected.front());
  EXPECT_EQ(verify_range(c, dup, ts.pub, 8, f.pub()), RangeVerdict::kDuplicate);

  RangeProof foreign = good;
  foreign.selected.front() = other.pub.entries.front();
  EXPECT_EQ(verify_range(c, foreign, ts.pub, 8, f.pub()), RangeVerdict::kNotMember);

  RangeProof many = good;
  many.selected = ts.pub.entries;
  many.selected.push_back(other.pub.entries.front());
  EXPECT_EQ(verify_range(c, many, ts.pub, 8, f.pub()), RangeVerdict::kTooMany);

  RangeProof zero_r = good;
  zero_r.r_star = 0;
  EXPECT_EQ(verify_range(c, zero_r, ts.pub, 8, f.pub()), RangeVerdict::kBadRandomness);

  RangeProof bent = good;
  bent.r_star = bent.r_star * 2 % f.pub().n();
  EXPECT_EQ(verify_range(c, bent, ts.pub, 8, f.pub()), RangeVerdict::kEquationFails);

  // a proof for 5 does not open an encryption of 6
  auto c6 = paillier::encrypt(f.pub(), paillier::Plaintext{6}, r);
  EXPECT_EQ(verify_range(c6, good, ts.pub, 8, f.pub()), RangeVerdict::kEquationFails);
}

TEST(RangeProof, GeqReduction) {
  Fixture f;
  TestSet a = gen_test_set(f.pub(), 8, f.rng, 1);
  TestSet b = gen_test_set(f.pub(), 8, f.rng, 2);
  TestSet d = gen_test_set(f.pub(), 8, f.rng, 3);
  auto r1 = paillier::sample_randomness(f.pub(), f.rng);
  auto r2 = paillier::sample_randomness(f.pub(), f.rng);
  auto c1 = paillier::encrypt(f.pub(), paillier::Plaintext{200}, r1);
  auto c2 = paillier::encrypt(f.pub(), paillier::Plaintext{77}, r2);
  auto proof = prove_geq(200, r1, 77, r2, TestSetTriple{&a, &b, &d}, f.pub());
  TestSetPublicTriple pubs{&a.pub, &b.pub, &d.pub};
  EXPECT_TRUE(verify_geq(c1, c2, proof, pubs, 8, f.pub()).accepted);

  // equal values: the difference proof is the empty selection
  auto c2eq = paillier::encrypt(f.pub(), paillier::Plaintext{200}, r2);
  auto eq = prove_geq(200, r1, 200, r2, TestSetTriple{&a, &b, &d}, f.pub());
  EXPECT_TRUE(eq.diff.selected.empty());
  EXPECT_TRUE(verify_geq(c1, c2eq, eq, pubs, 8, f.pub()).accepted);

  // 77 >= 200 has no proof: the difference wraps to n - 123
  EXPECT_THROW(prove_geq(77, r2, 200, r1, TestSetTriple{&a, &b, &d}, f.pub()), UnprovableError);
  EXPECT_THROW(prove_geq(200, r1, 77, r2, TestSetTriple{&a, &a, &d}, f.pub()), ParameterError);

  auto v = verify_geq(c2, c1, proof, pubs, 8, f.pub());
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.failed, Inequality::kX1);
}
