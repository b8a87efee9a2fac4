#include <vector>

#include <gtest/gtest.h>

#include "era/group.hpp"
#include "era/ot.hpp"

using namespace era;

namespace {

// Order-11 subgroup of Z_23^*: 4 = 2^2 and 9 = 3^2 are quadratic residues.
GroupParams tiny() { return GroupParams{23, 11, 4, 9}; }

std::vector<mpz_class> messages(std::size_t z, std::uint64_t offset) {
  std::vector<mpz_class> out;
  for (std::size_t i = 0; i < z; ++i) out.emplace_back(static_cast<unsigned long>(offset + 3 * i + 1));
  return out;
}

}  // namespace

TEST(GroupSetup, SmallestSafePrime) {
  GroupParams gp = group_setup(5, "tiny");
  EXPECT_EQ(gp.p, 23);
  EXPECT_EQ(gp.rho, 11);
  EXPECT_TRUE(valid_params(gp));
  EXPECT_TRUE(gp.in_subgroup(gp.g));
  EXPECT_TRUE(gp.in_subgroup(gp.h));
  EXPECT_NE(gp.g, gp.h);
}

TEST(GroupSetup, DeterministicAndSized) {
  GroupParams a = group_setup(128, "seed");
  GroupParams b = group_setup(128, "seed");
  EXPECT_EQ(a, b);
  EXPECT_EQ(bit_length(a.p), 128u);
  EXPECT_EQ(a.p, 2 * a.rho + 1);
  EXPECT_TRUE(valid_params(a));
  EXPECT_NE(group_setup(128, "other").p, a.p);
  EXPECT_THROW(group_setup(4, "x"), GenerationError);
}

TEST(ObliviousTransfer, KnownAnswerInTinyGroup) {
  GroupParams gp = tiny();
  ot::Query q = ot::query_with_secret(2, 3, 3, gp);
  EXPECT_EQ(q.request.y, 9);
  std::vector<mpz_class> ms{5, 7, 11};
  std::vector<mpz_class> ks{2, 5, 7};
  ot::Batch batch = ot::respond_with_exponents(q.request.y, ms, ks, gp);
  ASSERT_EQ(batch.xi.size(), 3u);
  EXPECT_EQ(batch.xi[0].a, 16);
  EXPECT_EQ(batch.xi[0].b, 5);
  EXPECT_EQ(batch.xi[1].a, 12);
  EXPECT_EQ(batch.xi[1].b, 21);
  EXPECT_EQ(batch.xi[2].a, 8);
  EXPECT_EQ(batch.xi[2].b, 5);
  EXPECT_EQ(ot::recover(batch, q.secret, gp), 7);
}

TEST(ObliviousTransfer, EveryChoiceRecovers) {
  GroupParams gp = group_setup(128, "ot-suite");
  Drbg rng("ot/every");
  for (std::size_t z : {2u, 10u}) {
    auto ms = messages(z, 1000 * z);
    for (std::size_t alpha = 1; alpha <= z; ++alpha) {
      ot::Query q = ot::query(alpha, z, gp, rng);
      ot::Batch batch = ot::respond(q.request.y, ms, gp, rng);
      EXPECT_EQ(ot::recover(batch, q.secret, gp), ms[alpha - 1]);
      for (std::size_t other = 1; other <= z; ++other) {
        if (other == alpha) continue;
        EXPECT_NE(ot::recover(batch.xi[other - 1], q.secret.r, gp), ms[other - 1]);
      }
    }
  }
}

TEST(ObliviousTransfer, Errors) {
  GroupParams gp = tiny();
  EXPECT_THROW(ot::query_with_secret(0, 3, 1, gp), DomainError);
  EXPECT_THROW(ot::query_with_secret(4, 3, 1, gp), DomainError);
  std::vector<mpz_class> ks{1, 2};
  std::vector<mpz_class> bad{5, 23};
  EXPECT_THROW(ot::respond_with_exponents(9, bad, ks, gp), EncodingError);
  std::vector<mpz_class> zero{0, 5};
  EXPECT_THROW(ot::respond_with_exponents(9, zero, ks, gp), EncodingError);
  std::vector<mpz_class> ok{5, 6};
  EXPECT_THROW(ot::respond_with_exponents(0, ok, ks, gp), DomainError);
  EXPECT_THROW(ot::respond_with_exponents(23, ok, ks, gp), DomainError);
  ot::Batch batch = ot::respond_with_exponents(9, ok, ks, gp);
  EXPECT_THROW(ot::recover(batch, ot::ReceiverSecret{1, 3}, gp), ProtocolError);
  EXPECT_THROW(ot::recover(ot::Pair{0, 5}, 1, gp), ProtocolError);
}
