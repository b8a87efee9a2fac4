#include <string>

#include <gtest/gtest.h>

#include "era/bulletin.hpp"

using namespace era;
using namespace era::bulletin;

namespace {

struct Parties {
  GroupParams gp = group_setup(64, "bulletin");
  Drbg rng{"bulletin/keys"};
  schnorr::SigningKey auctioneer = schnorr::SigningKey::generate(gp, rng);
  schnorr::SigningKey net_a = schnorr::SigningKey::generate(gp, rng);
  schnorr::SigningKey net_b = schnorr::SigningKey::generate(gp, rng);
  schnorr::SigningKey agent = schnorr::SigningKey::generate(gp, rng);

  Board board() const {
    Header h;
    h.group = gp;
    h.t = 3;
    h.auctioneer_n = mpz_class("0xc5a1f03b9d", 0);
    h.auctioneer_key = auctioneer.public_key();
    h.agent_key = agent.public_key();
    h.networks.push_back(NetworkEntry{"neta", mpz_class(1000003), net_a.public_key()});
    h.networks.push_back(NetworkEntry{"netb", mpz_class(1000033), net_b.public_key()});
    return Board(std::move(h));
  }

  // Three test sets, one commitment per network, marks, outcome, reveals.
  Board populated() const {
    Board b = board();
    for (std::uint32_t id = 1; id <= 3; ++id) {
      b.post(kAuctioneer, auctioneer, TestSetPost{id, {10 * id + 1, 10 * id + 2, 10 * id + 3}});
    }
    b.post("neta", net_a, CommitmentPost{1, mpz_class(777), mpz_class(888)});
    b.post("netb", net_b, CommitmentPost{2, mpz_class(555), mpz_class(666)});
    b.post("neta", net_a, MarkPost{MarkRole::kMax, 4});
    b.post("netb", net_b, MarkPost{MarkRole::kSec, 5});
    b.post(kAuctioneer, auctioneer, OutcomePost{7, 250, "neta"});
    b.post("neta", net_a, WinnerReveal{4, mpz_class(99)});
    b.post(kAuctioneer, auctioneer, PaymentReveal{5, mpz_class(1234), 42, 250, schnorr::Signature{1, 2}});
    return b;
  }
};

std::string drop_line(const std::string& text, int index) {
  std::size_t start = 0;
  for (int i = 0; i < index; ++i) start = text.find('\n', start) + 1;
  std::size_t end = text.find('\n', start) + 1;
  return text.substr(0, start) + text.substr(end);
}

}  // namespace

TEST(Board, SequencesAndReads) {
  Parties s;
  Board b = s.board();
  for (std::uint32_t id = 1; id <= 3; ++id) {
    EXPECT_EQ(b.post(kAuctioneer, s.auctioneer, TestSetPost{id, {1, 2, 3}}).seq, id);
  }
  EXPECT_EQ(b.read({PostKind::kTestSet, std::nullopt}).size(), 3u);
  EXPECT_TRUE(b.read({PostKind::kCommitment, std::nullopt}).empty());
  EXPECT_TRUE(b.verify_post(2));
  EXPECT_THROW(b.at(4), LookupError);
  EXPECT_THROW(b.at(0), LookupError);
}

TEST(Board, FiltersOnCompletedBoard) {
  Parties s;
  Board b = s.populated();
  EXPECT_EQ(b.size(), 10u);
  EXPECT_EQ(b.read({PostKind::kMark, std::nullopt}).size(), 2u);
  EXPECT_EQ(b.read({std::nullopt, std::string("neta")}).size(), 3u);
  EXPECT_EQ(b.commitments().size(), 2u);
  EXPECT_EQ(*b.commitment_seq_for_slot(2), 5u);
  EXPECT_EQ(b.mark(MarkRole::kSec)->seq, 7u);
  EXPECT_EQ(b.outcome()->as<OutcomePost>()->payment, 250);
}

TEST(Board, Authorization) {
  Parties s;
  Board b = s.board();
  EXPECT_THROW(b.post("agent", s.agent, CommitmentPost{1, 1, 1}), AuthorizationError);
  EXPECT_THROW(b.post("neta", s.net_a, TestSetPost{1, {1, 2, 3}}), AuthorizationError);
  EXPECT_THROW(b.post(kAuctioneer, s.auctioneer, CommitmentPost{1, 1, 1}), AuthorizationError);
  EXPECT_THROW(b.post("neta", s.net_b, CommitmentPost{1, 1, 1}), SigningError);
  EXPECT_EQ(b.size(), 0u);

  b.post("neta", s.net_a, CommitmentPost{1, 5, 6});
  EXPECT_THROW(b.post("netb", s.net_b, MarkPost{MarkRole::kMax, 1}), AuthorizationError);
  EXPECT_THROW(b.post("neta", s.net_a, MarkPost{MarkRole::kMax, 9}), ProtocolError);
  b.post("neta", s.net_a, MarkPost{MarkRole::kMax, 1});
  EXPECT_THROW(b.post("neta", s.net_a, MarkPost{MarkRole::kMax, 1}), ProtocolError);
  EXPECT_THROW(b.post("neta", s.net_a, CommitmentPost{1, 7, 8}), ProtocolError);
  EXPECT_THROW(b.post(kAuctioneer, s.auctioneer, TestSetPost{1, {1, 2}}), ProtocolError);
  EXPECT_THROW(b.post("netb", s.net_b, WinnerReveal{1, 3}), AuthorizationError);
}

TEST(BoardLog, RoundTrip) {
  Parties s;
  Board b = s.populated();
  std::string text = b.serialize();
  Board back = Board::parse(text);
  EXPECT_EQ(back.serialize(), text);
  EXPECT_EQ(back.header(), b.header());
  EXPECT_EQ(back.size(), b.size());
  EXPECT_EQ(back.mark(MarkRole::kMax)->as<MarkPost>()->commitment_seq, 4u);

  Board empty = s.board();
  EXPECT_EQ(Board::parse(empty.serialize()).size(), 0u);
}

TEST(BoardLog, DetectsDamage) {
  Parties s;
  std::string text = s.populated().serialize();

  auto line_of = [](const std::string& t) {
    try {
      Board::parse(t);
    } catch (const LoadError& e) {
      return e.line();
    }
    return std::size_t{0};
  };

  // missing trailing newline
  EXPECT_EQ(line_of(text.substr(0, text.size() - 1)), 11u);
  // dropped middle post: the next line reports the gap
  EXPECT_EQ(line_of(drop_line(text, 5)), 6u);
  // payload altered after signing
  std::string altered = text;
  altered.replace(altered.find("\t250\t"), 5, "\t251\t");
  EXPECT_EQ(line_of(altered), 9u);
  // non-canonical hex
  std::string padded = text;
  padded.replace(padded.find("\t309\t"), 5, "\t0309\t");
  EXPECT_EQ(line_of(padded), 5u);
  // header magic
  std::string bad_header = text;
  bad_header.replace(0, 5, "xxx-b");
  EXPECT_EQ(line_of(bad_header), 1u);
  EXPECT_EQ(line_of(""), 1u);
}

TEST(Board, RewriteResignsEditedRecords) {
  Parties s;
  Board b = s.populated();
  // swap which commitment carries which role; both authors re-sign
  b.rewrite({Board::Rewrite{6, MarkPost{MarkRole::kSec, 4}, &s.net_a},
             Board::Rewrite{7, MarkPost{MarkRole::kMax, 5}, &s.net_b}});
  EXPECT_EQ(b.mark(MarkRole::kMax)->author, "netb");
  EXPECT_TRUE(b.verify_post(6));
  EXPECT_TRUE(b.verify_post(7));
  EXPECT_NO_THROW(Board::parse(b.serialize()));
}
