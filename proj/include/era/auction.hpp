#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ranges>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/bulletin.hpp"
#include "era/config.hpp"
#include "era/errors.hpp"
#include "era/group.hpp"
#include "era/ope.hpp"
#include "era/ot.hpp"
#include "era/paillier.hpp"
#include "era/rangeproof.hpp"
#include "era/rng.hpp"
#include "era/schnorr.hpp"

namespace era::auction {

using bulletin::Board;
using bulletin::MarkRole;
using ope::Cents;
using ope::MappedBid;

// ---------------------------------------------------------------------------
// Ranking. Higher mapped bid first; among equal bids the lower registration
// slot wins. Slot 0 never names a bidder and marks the "no bid" sentinel.

struct RankedBid {
  MappedBid mapped = 0;
  std::uint32_t slot = 0;

  bool real() const { return slot != 0; }
  friend bool operator==(const RankedBid&, const RankedBid&) = default;
};

inline bool outranks(const RankedBid& a, const RankedBid& b) {
  if (!a.real()) return false;
  if (!b.real()) return true;
  return a.mapped > b.mapped || (a.mapped == b.mapped && a.slot < b.slot);
}

struct TopTwo {
  RankedBid first;
  RankedBid second;
};

// One pass over anything projectable to a RankedBid. Used by the internal
// auction, the global reduction, the patching audit and the latency bench.
template <std::ranges::input_range R, class Proj = std::identity>
TopTwo select_top_two(R&& range, Proj proj = {}) {
  TopTwo out;
  for (auto&& item : range) {
    const RankedBid& b = std::invoke(proj, item);
    if (outranks(b, out.first)) {
      out.second = out.first;
      out.first = b;
    } else if (outranks(b, out.second)) {
      out.second = b;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parties.

struct Bidder {
  std::uint32_t slot = 0;
  std::uint64_t identity = 0;
  Cents bid = 0;
  MappedBid mapped = 0;
  std::size_t network = 0;
  std::string ad_tag;
};

// A network's private record of one member.
struct Member {
  std::uint32_t slot = 0;
  std::uint64_t identity = 0;
  MappedBid mapped = 0;
  mpz_class r1;  // randomness under the auctioneer's n
  mpz_class r2;  // randomness under the network's n_j
  std::string ad_tag;

  RankedBid ranked() const { return RankedBid{mapped, slot}; }
};

struct AdNetwork {
  std::string name;
  paillier::KeyPair key;
  schnorr::SigningKey sign_key;
  std::vector<Member> members;

  const Member* member(std::uint32_t slot) const {
    for (const auto& m : members) {
      if (m.slot == slot) return &m;
    }
    return nullptr;
  }

  std::string serialize() const {
    std::string out = "network\t" + name + "\t" + hex(key.p()) + "\t" + hex(key.q()) + "\t" +
                      hex(sign_key.secret()) + "\n";
    for (const auto& m : members) {
      out += std::to_string(m.slot) + "\t" + std::to_string(m.identity) + "\t" +
             bulletin::detail::mapped_hex(m.mapped) + "\t" + hex(m.r1) + "\t" + hex(m.r2) + "\t" +
             m.ad_tag + "\n";
    }
    return out;
  }
};

struct Auctioneer {
  paillier::KeyPair key;
  schnorr::SigningKey sign_key;
  std::map<rangeproof::TestSetId, std::vector<rangeproof::PowerOpening>> openings;

  std::string serialize() const {
    std::string out = "auctioneer\t" + hex(key.p()) + "\t" + hex(key.q()) + "\t" +
                      hex(sign_key.secret()) + "\n";
    for (const auto& [id, powers] : openings) {
      out += std::to_string(id);
      for (const auto& p : powers) out += "\t" + std::to_string(p.position) + ":" + hex(p.randomness);
      out += "\n";
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Messages between stages.

struct InternalResult {
  std::string network;
  RankedBid top;
  RankedBid second;
  schnorr::Signature signature;
};

inline std::string internal_result_message(const InternalResult& r) {
  return "era/internal-result\t" + r.network + "\t" + bulletin::detail::mapped_hex(r.top.mapped) +
         "\t" + std::to_string(r.top.slot) + "\t" + bulletin::detail::mapped_hex(r.second.mapped) +
         "\t" + std::to_string(r.second.slot);
}

struct GlobalResult {
  RankedBid max;
  RankedBid sec;
  std::string max_network;
  std::string sec_network;
  std::vector<std::string> flagged;  // results dropped for a bad signature
};

struct AuctionOutcome {
  std::uint64_t winner_identity = 0;
  Cents payment = 0;  // 0: no second bid
  std::string winner_network;
  MappedBid mapped_max = 0;
  MappedBid mapped_sec = 0;
};

// Which test set backs each comparison (ids 1..l-1).
struct OrderingChallenge {
  std::vector<rangeproof::TestSetId> test_sets;

  static OrderingChallenge canonical(std::size_t comparisons) {
    OrderingChallenge c;
    for (std::size_t k = 1; k <= comparisons; ++k) {
      c.test_sets.push_back(static_cast<rangeproof::TestSetId>(k));
    }
    return c;
  }

  static OrderingChallenge shuffled(std::size_t comparisons, std::string_view seed) {
    OrderingChallenge c = canonical(comparisons);
    Drbg rng(std::string("era/challenge/") + std::string(seed));
    shuffle(c.test_sets, rng);
    return c;
  }
};

struct ComparisonEntry {
  std::uint32_t index = 0;  // 1-based k
  rangeproof::TestSetId test_set = 0;
  std::uint32_t hi_slot = 0;
  std::uint32_t lo_slot = 0;
  std::optional<rangeproof::RangeProof> proof;  // empty: prover could not prove
};

inline constexpr std::string_view kTranscriptMagic = "era-ordering v1";

struct OrderingTranscript {
  std::vector<ComparisonEntry> entries;

  std::string serialize() const {
    std::string out = std::string(kTranscriptMagic) + "\t" + std::to_string(entries.size()) + "\n";
    for (const auto& e : entries) {
      out += std::to_string(e.index) + "\t" + std::to_string(e.test_set) + "\t" +
             std::to_string(e.hi_slot) + "\t" + std::to_string(e.lo_slot) + "\t";
      if (!e.proof) {
        out += "unprovable\n";
        continue;
      }
      out += hex(e.proof->r_star) + "\t";
      if (e.proof->selected.empty()) out += "-";
      for (std::size_t i = 0; i < e.proof->selected.size(); ++i) {
        if (i) out += ",";
        out += hex(e.proof->selected[i].value);
      }
      out += "\n";
    }
    return out;
  }

  // Ciphertexts are tagged with `key`, the auctioneer's public key.
  static OrderingTranscript parse(std::string_view text, const paillier::PublicKey& key) {
    using bulletin::detail::parse_u64;
    using bulletin::detail::split;
    OrderingTranscript out;
    std::size_t line_no = 0;
    std::optional<std::uint64_t> expected;
    while (!text.empty()) {
      ++line_no;
      auto nl = text.find('\n');
      if (nl == std::string_view::npos) throw LoadError(line_no, "truncated line");
      std::string_view line = text.substr(0, nl);
      text.remove_prefix(nl + 1);
      auto fields = split(line, '\t');
      if (line_no == 1) {
        if (fields.size() != 2 || fields[0] != kTranscriptMagic) throw LoadError(1, "bad transcript header");
        expected = parse_u64(fields[1]);
        if (!expected) throw LoadError(1, "bad comparison count");
        continue;
      }
      auto u32 = [&](std::string_view f) {
        auto v = parse_u64(f);
        if (!v || *v > 0xffffffffull) throw LoadError(line_no, "bad integer field");
        return static_cast<std::uint32_t>(*v);
      };
      if (fields.size() == 5 && fields[4] == "unprovable") {
        out.entries.push_back(ComparisonEntry{u32(fields[0]), u32(fields[1]), u32(fields[2]),
                                              u32(fields[3]), std::nullopt});
        continue;
      }
      if (fields.size() != 6) throw LoadError(line_no, "expected 6 fields");
      rangeproof::RangeProof proof;
      proof.test_set = u32(fields[1]);
      auto r_star = parse_hex(fields[4]);
      if (!r_star) throw LoadError(line_no, "bad r*");
      proof.r_star = *r_star;
      if (fields[5] != "-") {
        for (auto c : split(fields[5], ',')) {
          auto v = parse_hex(c);
          if (!v) throw LoadError(line_no, "bad selected ciphertext");
          proof.selected.push_back(paillier::Ciphertext{*v, key.tag()});
        }
      }
      out.entries.push_back(ComparisonEntry{u32(fields[0]), proof.test_set, u32(fields[2]),
                                            u32(fields[3]), std::move(proof)});
    }
    if (!expected) throw LoadError(1, "empty transcript");
    if (out.entries.size() != *expected) {
      throw LoadError(line_no, "transcript holds " + std::to_string(out.entries.size()) +
                                   " comparisons, header says " + std::to_string(*expected));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// World.

struct PhaseTimes {
  double mapped_bid_gen_ms = 0;  // all OT fetches
  double test_set_gen_ms = 0;
  double commitment_gen_ms = 0;
};

struct World {
  Config config;
  GroupParams group;
  ope::Agent agent;
  Auctioneer auctioneer;
  std::vector<AdNetwork> networks;
  std::vector<Bidder> bidders;  // ground truth, indexed by slot - 1
  Board board;
  std::size_t init_posts = 0;
  OrderingChallenge challenge;

  std::vector<InternalResult> results;
  std::optional<GlobalResult> global;
  std::optional<AuctionOutcome> outcome;
  OrderingTranscript transcript;

  AdNetwork& network(std::string_view name) {
    for (auto& n : networks) {
      if (n.name == name) return n;
    }
    throw LookupError("unknown network " + std::string(name));
  }
  const AdNetwork& network(std::string_view name) const {
    return const_cast<World*>(this)->network(name);
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline std::string network_name(std::size_t j) { return "net" + std::to_string(j + 1); }

inline paillier::Ciphertext commitment_bid(const Board& board, std::uint64_t seq,
                                           const paillier::PublicKey& key) {
  const auto* c = board.at(seq).as<bulletin::CommitmentPost>();
  if (!c) throw ProtocolError("seq " + std::to_string(seq) + " is not a commitment");
  return paillier::adopt(key, c->bid);
}

inline rangeproof::TestSetPublic test_set_public(const Board& board, rangeproof::TestSetId id,
                                                 const paillier::PublicKey& key) {
  const auto* ts = board.test_set(id);
  if (!ts) throw ProtocolError("test set " + std::to_string(id) + " not on the board");
  rangeproof::TestSetPublic out{id, {}};
  out.entries.reserve(ts->entries.size());
  for (const auto& e : ts->entries) out.entries.push_back(paillier::Ciphertext{e, key.tag()});
  return out;
}

}  // namespace detail

// Init: agent table, keys, OT fetches, l-1 test sets, then one commitment per
// bidder in slot order.
inline World init_auction(const Config& cfg, PhaseTimes* times = nullptr) {
  validate(cfg);
  Drbg root("era/world/" + cfg.seed);
  GroupParams gp = group_setup(cfg.group_bits, "world/" + cfg.seed);
  ope::BidSpace space = ope::build_bid_space(cfg.z_min_cents, cfg.z_max_cents, cfg.z_step_cents);

  // agent
  ope::OpeTable table = ope::generate_mapping(space, cfg.t, cfg.seed);
  Drbg agent_rng = root.fork("agent/key");
  schnorr::SigningKey agent_key = schnorr::SigningKey::generate(gp, agent_rng);
  ope::Agent agent(space, std::move(table), gp, agent_key);

  // auctioneer
  Drbg auct_rng = root.fork("auctioneer/key");
  Auctioneer auctioneer{paillier::keygen(cfg.key_bits, paillier::RandomPrimes(auct_rng)),
                        schnorr::SigningKey::generate(gp, auct_rng),
                        {}};

  // networks
  std::vector<AdNetwork> networks;
  networks.reserve(cfg.w);
  for (std::size_t j = 0; j < cfg.w; ++j) {
    Drbg net_rng = root.fork("network/" + std::to_string(j));
    auto key = paillier::keygen(cfg.key_bits, paillier::RandomPrimes(net_rng));
    if (key.n() <= cfg.l) throw ConfigError("config: identities do not fit under n_j");
    networks.push_back(AdNetwork{detail::network_name(j), std::move(key),
                                 schnorr::SigningKey::generate(gp, net_rng), {}});
  }

  // bidders: identities are a seeded permutation of 1..l
  Drbg bidder_rng = root.fork("bidders");
  std::vector<std::uint64_t> identities(cfg.l);
  for (std::size_t i = 0; i < cfg.l; ++i) identities[i] = i + 1;
  shuffle(identities, bidder_rng);
  std::vector<Bidder> bidders;
  bidders.reserve(cfg.l);
  for (std::size_t i = 0; i < cfg.l; ++i) {
    Bidder b;
    b.slot = static_cast<std::uint32_t>(i + 1);
    b.identity = identities[i];
    b.bid = space.values[bidder_rng.uniform_u64(space.z())];
    b.network = cfg.assignment == Assignment::kRoundRobin ? i % cfg.w
                                                          : bidder_rng.uniform_u64(cfg.w);
    bidders.push_back(std::move(b));
  }

  // mapped-bid fetch: the bidder keeps alpha, the agent sees only y
  auto t0 = detail::Clock::now();
  for (auto& b : bidders) {
    Drbg q_rng = root.fork("bidder/ot/" + std::to_string(b.slot));
    Drbg a_rng = root.fork("agent/ot/" + std::to_string(b.slot));
    std::size_t alpha = *space.index_of(b.bid) + 1;
    ot::Query q = ot::query(alpha, space.z(), gp, q_rng);
    ot::Batch batch = agent.serve(q.request, a_rng);
    mpz_class m = ot::recover(batch, q.secret, gp);
    b.mapped = m.get_ui();
  }
  if (times) times->mapped_bid_gen_ms = detail::ms_since(t0);

  bulletin::Header header;
  header.group = gp;
  header.t = cfg.t;
  header.auctioneer_n = auctioneer.key.n();
  header.auctioneer_key = auctioneer.sign_key.public_key();
  header.agent_key = agent.attestation_key();
  for (const auto& n : networks) {
    header.networks.push_back(bulletin::NetworkEntry{n.name, n.key.n(), n.sign_key.public_key()});
  }
  Board board(std::move(header));
  const paillier::PublicKey& apub = auctioneer.key.public_key();

  t0 = detail::Clock::now();
  for (std::size_t id = 1; id < cfg.l; ++id) {
    Drbg ts_rng = root.fork("testset/" + std::to_string(id));
    auto ts = rangeproof::gen_test_set(apub, cfg.t, ts_rng, static_cast<rangeproof::TestSetId>(id));
    bulletin::TestSetPost post{ts.pub.id, {}};
    post.entries.reserve(ts.pub.entries.size());
    for (auto& e : ts.pub.entries) post.entries.push_back(std::move(e.value));
    board.post(bulletin::kAuctioneer, auctioneer.sign_key, std::move(post));
    auctioneer.openings.emplace(ts.pub.id, std::move(ts.powers));
  }
  if (times) times->test_set_gen_ms = detail::ms_since(t0);

  t0 = detail::Clock::now();
  for (const auto& b : bidders) {
    AdNetwork& net = networks[b.network];
    Drbg c_rng = root.fork("commit/" + std::to_string(b.slot));
    Member m;
    m.slot = b.slot;
    m.identity = b.identity;
    m.mapped = b.mapped;
    m.r1 = paillier::sample_randomness(apub, c_rng).r;
    m.r2 = paillier::sample_randomness(net.key.public_key(), c_rng).r;
    m.ad_tag = hex(c_rng.random_bits(64));
    auto c = paillier::encrypt(apub, paillier::Plaintext{mpz_class(static_cast<unsigned long>(m.mapped))},
                               paillier::Randomness{m.r1});
    auto id = paillier::encrypt(net.key.public_key(),
                                paillier::Plaintext{mpz_class(static_cast<unsigned long>(m.identity))},
                                paillier::Randomness{m.r2});
    board.post(net.name, net.sign_key,
               bulletin::CommitmentPost{m.slot, std::move(c.value), std::move(id.value)});
    net.members.push_back(std::move(m));
  }
  if (times) times->commitment_gen_ms = detail::ms_since(t0);
  for (auto& b : bidders) b.ad_tag = networks[b.network].member(b.slot)->ad_tag;

  std::size_t init_posts = board.size();
  return World{cfg,
               gp,
               std::move(agent),
               std::move(auctioneer),
               std::move(networks),
               std::move(bidders),
               std::move(board),
               init_posts,
               OrderingChallenge::canonical(cfg.l - 1),
               {},
               std::nullopt,
               std::nullopt,
               {}};
}

inline void sign_result(InternalResult& r, const AdNetwork& net, const GroupParams& gp) {
  r.signature = schnorr::sign(gp, net.sign_key, internal_result_message(r));
}

// Top two of the network's members. nullopt for an empty network.
inline std::optional<InternalResult> internal_auction(const AdNetwork& net, const GroupParams& gp) {
  if (net.members.empty()) return std::nullopt;
  TopTwo top = select_top_two(net.members, &Member::ranked);
  InternalResult r{net.name, top.first, top.second, {}};
  sign_result(r, net, gp);
  return r;
}

inline GlobalResult global_auction(const bulletin::Header& header,
                                   const std::vector<InternalResult>& results) {
  GlobalResult out;
  struct Entry {
    RankedBid bid;
    const std::string* network;
  };
  std::vector<Entry> entries;
  entries.reserve(2 * results.size());
  for (const auto& r : results) {
    const auto* entry = header.network(r.network);
    if (!entry || !schnorr::verify(header.group, entry->sign_key, internal_result_message(r),
                                   r.signature)) {
      out.flagged.push_back(r.network);
      continue;
    }
    if (r.top.real()) entries.push_back(Entry{r.top, &r.network});
    if (r.second.real()) entries.push_back(Entry{r.second, &r.network});
  }
  if (entries.empty()) throw ProtocolError("global auction: no usable internal result");
  // Rank the entries, then read back owners.
  TopTwo top = select_top_two(entries, &Entry::bid);
  out.max = top.first;
  out.sec = top.second;
  for (const auto& e : entries) {
    if (e.bid == out.max) out.max_network = *e.network;
    if (out.sec.real() && e.bid == out.sec) out.sec_network = *e.network;
  }
  return out;
}

// Deviations used by the tamper harness; default is the honest run.
struct FaultPlan {
  std::optional<std::string> forge_network;  // drops its best member from its result
  std::optional<std::uint64_t> winner_override;
  std::optional<Cents> payment_override;
  bool swap_marks = false;
};

inline void run_internal_and_global(World& w, const FaultPlan& plan = {}) {
  w.results.clear();
  for (const auto& net : w.networks) {
    auto r = internal_auction(net, w.group);
    if (!r) continue;
    if (plan.forge_network && *plan.forge_network == net.name) {
      TopTwo forged = select_top_two(
          net.members | std::views::filter([&](const Member& m) { return m.slot != r->top.slot; }),
          &Member::ranked);
      r->top = forged.first;
      r->second = forged.second;
      sign_result(*r, net, w.group);
    }
    w.results.push_back(std::move(*r));
  }
  w.global = global_auction(w.board.header(), w.results);
}

// Winner identity, payment, marks, outcome post and the Step 1 reveals.
inline AuctionOutcome resolve_outcome(World& w, const FaultPlan& plan = {}) {
  if (!w.global) throw ProtocolError("resolve: global stage not run");
  const GlobalResult& g = *w.global;
  AdNetwork& max_net = w.network(g.max_network);
  const Member* winner = max_net.member(g.max.slot);
  if (!winner) throw ProtocolError("network " + max_net.name + " fails to resolve identity");

  AuctionOutcome out;
  out.winner_identity = plan.winner_override.value_or(winner->identity);
  out.winner_network = max_net.name;
  out.mapped_max = g.max.mapped;
  out.mapped_sec = g.sec.mapped;
  out.payment = g.sec.real() ? w.agent.unmap(g.sec.mapped) : 0;
  if (plan.payment_override) out.payment = *plan.payment_override;

  const paillier::PublicKey& apub = w.auctioneer.key.public_key();
  std::uint64_t seq_max = *w.board.commitment_seq_for_slot(g.max.slot);
  std::optional<std::uint64_t> seq_sec;
  if (g.sec.real()) seq_sec = *w.board.commitment_seq_for_slot(g.sec.slot);

  MarkRole role_of_max = plan.swap_marks ? MarkRole::kSec : MarkRole::kMax;
  MarkRole role_of_sec = plan.swap_marks ? MarkRole::kMax : MarkRole::kSec;
  if (plan.swap_marks && !seq_sec) throw HarnessError("swapped marks need a second bid");
  w.board.post(max_net.name, max_net.sign_key, bulletin::MarkPost{role_of_max, seq_max});
  if (seq_sec) {
    AdNetwork& sec_net = w.network(g.sec_network);
    w.board.post(sec_net.name, sec_net.sign_key, bulletin::MarkPost{role_of_sec, *seq_sec});
  }
  w.board.post(bulletin::kAuctioneer, w.auctioneer.sign_key,
               bulletin::OutcomePost{out.winner_identity, out.payment, out.winner_network});

  // The network owning the max-marked commitment opens its identity.
  std::uint64_t marked_max = plan.swap_marks ? *seq_sec : seq_max;
  const auto& marked_owner = w.network(w.board.at(marked_max).author);
  std::uint32_t marked_slot = w.board.at(marked_max).as<bulletin::CommitmentPost>()->slot;
  w.board.post(marked_owner.name, marked_owner.sign_key,
               bulletin::WinnerReveal{marked_max, marked_owner.member(marked_slot)->r2});

  if (seq_sec) {
    std::uint64_t marked_sec = plan.swap_marks ? seq_max : *seq_sec;
    auto c = detail::commitment_bid(w.board, marked_sec, apub);
    mpz_class r1 = paillier::recover_random(c, w.auctioneer.key).r;
    bulletin::PaymentReveal reveal{marked_sec, std::move(r1), 0, out.payment, {}};
    if (auto att = w.agent.attest(out.payment)) {
      reveal.mapped = att->mapped;
      reveal.attestation = att->signature;
    }
    w.board.post(bulletin::kAuctioneer, w.auctioneer.sign_key, std::move(reveal));
  }
  w.outcome = out;
  return out;
}

// ---------------------------------------------------------------------------
// Ordering (Step 2).

struct Comparison {
  std::uint32_t hi_slot = 0;
  std::uint32_t lo_slot = 0;
};

// (max, sec) then (sec, i) for every other slot, ascending.
inline std::optional<std::vector<Comparison>> comparison_plan(const Board& board, std::string& why) {
  auto commitments = board.commitments();
  if (commitments.size() <= 1) return std::vector<Comparison>{};
  const auto* max_mark = board.mark(MarkRole::kMax);
  const auto* sec_mark = board.mark(MarkRole::kSec);
  if (!max_mark || !sec_mark) {
    why = "marks missing";
    return std::nullopt;
  }
  auto slot_of = [&](const bulletin::SignedPost* mark) {
    return board.at(mark->as<bulletin::MarkPost>()->commitment_seq).as<bulletin::CommitmentPost>()->slot;
  };
  std::uint32_t max_slot = slot_of(max_mark);
  std::uint32_t sec_slot = slot_of(sec_mark);
  if (max_slot == sec_slot) {
    why = "max and sec marks name the same commitment";
    return std::nullopt;
  }
  std::vector<Comparison> out{{max_slot, sec_slot}};
  for (const auto* c : commitments) {
    std::uint32_t s = c->as<bulletin::CommitmentPost>()->slot;
    if (s != max_slot && s != sec_slot) out.push_back(Comparison{sec_slot, s});
  }
  return out;
}

// The auctioneer opens every commitment with phi and proves each difference.
inline OrderingTranscript prove_ordering(const Auctioneer& auctioneer, const Board& board,
                                         const OrderingChallenge& challenge) {
  std::string why;
  auto plan = comparison_plan(board, why);
  if (!plan) throw ProtocolError("prove ordering: " + why);
  if (challenge.test_sets.size() != plan->size()) {
    throw ProtocolError("prove ordering: challenge size does not match l - 1");
  }
  const paillier::PublicKey& key = auctioneer.key.public_key();
  const unsigned t = board.header().t;

  struct Opened {
    mpz_class x;
    mpz_class r;
  };
  std::map<std::uint32_t, Opened> opened;
  auto open = [&](std::uint32_t slot) -> const Opened& {
    auto it = opened.find(slot);
    if (it != opened.end()) return it->second;
    auto c = detail::commitment_bid(board, *board.commitment_seq_for_slot(slot), key);
    Opened o{paillier::decrypt_with_phi(c, auctioneer.key).m,
             paillier::recover_random(c, auctioneer.key).r};
    return opened.emplace(slot, std::move(o)).first->second;
  };

  OrderingTranscript out;
  for (std::size_t k = 0; k < plan->size(); ++k) {
    const Comparison& cmp = (*plan)[k];
    rangeproof::TestSetId id = challenge.test_sets[k];
    ComparisonEntry entry{static_cast<std::uint32_t>(k + 1), id, cmp.hi_slot, cmp.lo_slot, std::nullopt};
    const Opened& hi = open(cmp.hi_slot);
    const Opened& lo = open(cmp.lo_slot);
    mpz_class d = mod(hi.x - lo.x, key.n());
    auto it = auctioneer.openings.find(id);
    if (it != auctioneer.openings.end() && d < pow2(t)) {
      rangeproof::TestSet ts{detail::test_set_public(board, id, key), it->second};
      mpz_class r_d = hi.r * *invert(lo.r, key.n()) % key.n();
      entry.proof = rangeproof::prove_range(d, paillier::Randomness{r_d}, ts, key);
    }
    out.entries.push_back(std::move(entry));
  }
  return out;
}

struct Verdict {
  bool accepted = false;
  int step = 0;                 // 1 or 2 on reject
  std::string reason;
  std::uint32_t comparison = 0;  // failing k (Step 2)
  std::uint32_t slot = 0;        // bidder slot of the violated comparison

  static Verdict accept() { return Verdict{true, 0, {}, 0, 0}; }
  static Verdict reject(int step, std::string why, std::uint32_t k = 0, std::uint32_t slot = 0) {
    return Verdict{false, step, std::move(why), k, slot};
  }
};

inline Verdict verify_ordering(const Board& board, const OrderingTranscript& transcript,
                               const OrderingChallenge& challenge) {
  std::string why;
  auto plan = comparison_plan(board, why);
  if (!plan) return Verdict::reject(2, why);
  if (transcript.entries.size() != plan->size()) {
    return Verdict::reject(2, "expected " + std::to_string(plan->size()) + " comparisons, got " +
                                  std::to_string(transcript.entries.size()));
  }
  if (challenge.test_sets.size() != plan->size()) return Verdict::reject(2, "challenge size mismatch");
  std::set<rangeproof::TestSetId> distinct(challenge.test_sets.begin(), challenge.test_sets.end());
  if (distinct.size() != challenge.test_sets.size()) return Verdict::reject(2, "challenge reuses a test set");

  paillier::PublicKey key(board.header().auctioneer_n);
  const unsigned t = board.header().t;
  for (std::size_t k = 0; k < plan->size(); ++k) {
    const Comparison& cmp = (*plan)[k];
    const ComparisonEntry& e = transcript.entries[k];
    auto kk = static_cast<std::uint32_t>(k + 1);
    if (e.index != kk || e.hi_slot != cmp.hi_slot || e.lo_slot != cmp.lo_slot) {
      return Verdict::reject(2, "comparison does not match the marked plan", kk, cmp.lo_slot);
    }
    if (e.test_set != challenge.test_sets[k] || !board.test_set(e.test_set)) {
      return Verdict::reject(2, "comparison uses the wrong test set", kk, cmp.lo_slot);
    }
    if (!e.proof) return Verdict::reject(2, "prover supplied no proof", kk, cmp.lo_slot);
    auto c_hi = detail::commitment_bid(board, *board.commitment_seq_for_slot(cmp.hi_slot), key);
    auto c_lo = detail::commitment_bid(board, *board.commitment_seq_for_slot(cmp.lo_slot), key);
    if (!paillier::is_unit(c_lo.value, key.n_sq())) {
      return Verdict::reject(2, "commitment is not a valid ciphertext", kk, cmp.lo_slot);
    }
    auto d = rangeproof::difference_ciphertext(c_hi, c_lo, key);
    auto v = rangeproof::verify_range(d, *e.proof, detail::test_set_public(board, e.test_set, key), t, key);
    if (v != rangeproof::RangeVerdict::kAccept) {
      return Verdict::reject(2, rangeproof::to_string(v), kk, cmp.lo_slot);
    }
  }
  return Verdict::accept();
}

// ---------------------------------------------------------------------------
// Step 1.

// E_{n_j}(claimed, r2) must reproduce the max-marked identity ciphertext.
inline Verdict verify_winner(const Board& board, std::string_view network, const mpz_class& r2,
                             std::uint64_t claimed) {
  const auto* mark = board.mark(MarkRole::kMax);
  if (!mark) return Verdict::reject(1, "max mark missing");
  const auto& commitment = board.at(mark->as<bulletin::MarkPost>()->commitment_seq);
  if (commitment.author != network) return Verdict::reject(1, "winner network does not own the max commitment");
  const auto* entry = board.header().network(network);
  if (!entry) return Verdict::reject(1, "winner network not registered");
  paillier::PublicKey key(entry->paillier_n);
  mpz_class s(static_cast<unsigned long>(claimed));
  if (claimed == 0 || s >= key.n() || r2 <= 0 || r2 >= key.n() || !paillier::is_unit(r2, key.n())) {
    return Verdict::reject(1, "winner reveal out of range");
  }
  auto c = paillier::encrypt(key, paillier::Plaintext{s}, paillier::Randomness{r2});
  if (c.value != commitment.as<bulletin::CommitmentPost>()->identity) {
    return Verdict::reject(1, "winner identity does not re-encrypt to the marked commitment");
  }
  return Verdict::accept();
}

inline Verdict verify_winner(const Board& board) {
  const auto* outcome_post = board.outcome();
  if (!outcome_post) return Verdict::reject(1, "outcome missing");
  const auto& outcome = *outcome_post->as<bulletin::OutcomePost>();
  const auto* mark = board.mark(MarkRole::kMax);
  if (!mark) return Verdict::reject(1, "max mark missing");
  std::uint64_t seq = mark->as<bulletin::MarkPost>()->commitment_seq;
  for (const auto* p : board.read({bulletin::PostKind::kReveal, outcome.winner_network})) {
    const auto* r = p->as<bulletin::WinnerReveal>();
    if (r && r->commitment_seq == seq) {
      return verify_winner(board, outcome.winner_network, r->r2, outcome.winner_identity);
    }
  }
  return Verdict::reject(1, "winner reveal missing");
}

// Oracle: payment in cents -> OPES(payment), or nullopt when the agent has none.
template <class Oracle>
  requires std::invocable<Oracle&, Cents>
Verdict verify_payment(const Board& board, Oracle&& oracle, const mpz_class& r1, Cents claimed) {
  const auto* sec = board.mark(MarkRole::kSec);
  if (board.commitments().size() <= 1) {
    if (sec) return Verdict::reject(1, "sec mark on a single-bidder auction");
    return claimed == 0 ? Verdict::accept() : Verdict::reject(1, "single-bidder auction must pay 0");
  }
  if (!sec) return Verdict::reject(1, "sec mark missing");
  std::optional<MappedBid> mapped = oracle(claimed);
  if (!mapped) return Verdict::reject(1, "agent has no mapping for the claimed payment");
  paillier::PublicKey key(board.header().auctioneer_n);
  if (r1 <= 0 || r1 >= key.n() || !paillier::is_unit(r1, key.n())) {
    return Verdict::reject(1, "payment randomness out of range");
  }
  auto c = paillier::encrypt(key, paillier::Plaintext{mpz_class(static_cast<unsigned long>(*mapped))},
                             paillier::Randomness{r1});
  auto marked = board.at(sec->as<bulletin::MarkPost>()->commitment_seq).as<bulletin::CommitmentPost>();
  if (c.value != marked->bid) return Verdict::reject(1, "payment does not re-encrypt to the marked commitment");
  return Verdict::accept();
}

// Live agent as the oracle.
inline auto agent_oracle(const ope::Agent& agent) {
  return [&agent](Cents c) -> std::optional<MappedBid> {
    auto a = agent.attest(c);
    if (!a) return std::nullopt;
    return a->mapped;
  };
}

// Signed attestation on the board as the oracle.
inline auto attestation_oracle(const Board& board, const bulletin::PaymentReveal& reveal) {
  return [&board, &reveal](Cents c) -> std::optional<MappedBid> {
    if (c != reveal.payment) return std::nullopt;
    if (!schnorr::verify(board.header().group, board.header().agent_key,
                         ope::attestation_message(reveal.payment, reveal.mapped), reveal.attestation)) {
      return std::nullopt;
    }
    return reveal.mapped;
  };
}

inline Verdict verify_payment(const Board& board) {
  const auto* outcome_post = board.outcome();
  if (!outcome_post) return Verdict::reject(1, "outcome missing");
  Cents claimed = outcome_post->as<bulletin::OutcomePost>()->payment;
  const auto* sec = board.mark(MarkRole::kSec);
  if (!sec) {
    return verify_payment(board, [](Cents) { return std::optional<MappedBid>{}; }, mpz_class(0), claimed);
  }
  std::uint64_t seq = sec->as<bulletin::MarkPost>()->commitment_seq;
  for (const auto* p : board.read({bulletin::PostKind::kReveal, std::string(bulletin::kAuctioneer)})) {
    const auto* r = p->as<bulletin::PaymentReveal>();
    if (r && r->commitment_seq == seq) {
      return verify_payment(board, attestation_oracle(board, *r), r->r1, claimed);
    }
  }
  return Verdict::reject(1, "payment reveal missing");
}

// Steps 1 and 2 from public material only.
inline Verdict verify_board(const Board& board, const OrderingTranscript& transcript,
                            const OrderingChallenge& challenge) {
  if (auto v = verify_winner(board); !v.accepted) return v;
  if (auto v = verify_payment(board); !v.accepted) return v;
  if (board.commitments().size() <= 1) {
    return transcript.entries.empty() ? Verdict::accept()
                                      : Verdict::reject(2, "single-bidder auction has no comparisons");
  }
  return verify_ordering(board, transcript, challenge);
}

inline Verdict verify_board(const Board& board, const OrderingTranscript& transcript) {
  std::size_t l = board.commitments().size();
  return verify_board(board, transcript, OrderingChallenge::canonical(l == 0 ? 0 : l - 1));
}

// ---------------------------------------------------------------------------
// Step 3: the auctioneer decrypts every commitment and recomputes each
// network's top two. Networks whose submitted result disagrees are returned
// in registration order.
inline std::vector<std::string> patch_verify(const Auctioneer& auctioneer, const Board& board,
                                             const std::vector<InternalResult>& results) {
  std::map<std::string, std::vector<RankedBid>> by_network;
  const paillier::PublicKey& key = auctioneer.key.public_key();
  for (const auto* p : board.commitments()) {
    const auto* c = p->as<bulletin::CommitmentPost>();
    mpz_class m;
    try {
      m = paillier::decrypt_with_phi(paillier::adopt(key, c->bid), auctioneer.key).m;
    } catch (const DecryptionError&) {
      m = 0;
    }
    MappedBid v = m.fits_ulong_p() ? m.get_ui() : ~MappedBid{0};
    by_network[p->author].push_back(RankedBid{v, c->slot});
  }
  std::vector<std::string> blamed;
  for (const auto& entry : board.header().networks) {
    auto it = by_network.find(entry.name);
    std::vector<const InternalResult*> submitted;
    for (const auto& r : results) {
      if (r.network == entry.name) submitted.push_back(&r);
    }
    if (it == by_network.end()) {
      if (!submitted.empty()) blamed.push_back(entry.name);
      continue;
    }
    TopTwo truth = select_top_two(it->second);
    bool agrees = submitted.size() == 1 && submitted[0]->top == truth.first &&
                  submitted[0]->second == truth.second;
    if (!agrees) blamed.push_back(entry.name);
  }
  return blamed;
}

// ---------------------------------------------------------------------------
// Whole runs.

inline void execute(World& w, const FaultPlan& plan = {}) {
  run_internal_and_global(w, plan);
  resolve_outcome(w, plan);
  w.transcript = w.config.l > 1 ? prove_ordering(w.auctioneer, w.board, w.challenge) : OrderingTranscript{};
}

inline World run_honest(const Config& cfg) {
  World w = init_auction(cfg);
  execute(w);
  return w;
}

enum class FaultKind {
  kWrongWinner,
  kInflatedPayment,
  kSwappedMarks,
  kForgedInternalResult,
  kCommitmentSubstitution,
};

inline constexpr FaultKind kAllFaults[] = {FaultKind::kWrongWinner, FaultKind::kInflatedPayment,
                                           FaultKind::kSwappedMarks, FaultKind::kForgedInternalResult,
                                           FaultKind::kCommitmentSubstitution};

inline const char* to_string(FaultKind k) {
  switch (k) {
    case FaultKind::kWrongWinner: return "wrong-winner";
    case FaultKind::kInflatedPayment: return "inflated-payment";
    case FaultKind::kSwappedMarks: return "swapped-marks";
    case FaultKind::kForgedInternalResult: return "forged-internal-result";
    case FaultKind::kCommitmentSubstitution: return "commitment-substitution";
  }
  return "?";
}

inline FaultKind parse_fault(std::string_view name) {
  for (FaultKind k : kAllFaults) {
    if (name == to_string(k)) return k;
  }
  throw HarnessError("unknown fault kind: " + std::string(name));
}

struct TamperResult {
  World world;
  std::vector<std::string> culprits;  // networks that misbehaved
};

// Replays the auction from the end of initialization with one party
// deviating. Faults on the auctioneer's side leave no network to blame.
inline TamperResult tamper(const World& honest, FaultKind kind) {
  if (!honest.outcome || !honest.global) throw HarnessError("tamper: needs a completed honest run");
  if (honest.config.l < 2) throw HarnessError("tamper: needs at least two bidders");
  World w = honest;
  w.board = honest.board.prefix(honest.init_posts);
  w.results.clear();
  w.global.reset();
  w.outcome.reset();
  w.transcript = {};

  FaultPlan plan;
  std::vector<std::string> culprits;
  const GlobalResult& g = *honest.global;
  switch (kind) {
    case FaultKind::kWrongWinner: {
      std::uint64_t truth = honest.outcome->winner_identity;
      plan.winner_override = truth == 1 ? 2 : truth - 1;
      break;
    }
    case FaultKind::kInflatedPayment:
      plan.payment_override = honest.outcome->payment + honest.config.z_step_cents;
      break;
    case FaultKind::kSwappedMarks:
      plan.swap_marks = true;
      break;
    case FaultKind::kForgedInternalResult:
      plan.forge_network = g.max_network;
      culprits.push_back(g.max_network);
      break;
    case FaultKind::kCommitmentSubstitution: {
      AdNetwork& net = w.network(g.max_network);
      auto it = std::find_if(net.members.begin(), net.members.end(),
                             [&](const Member& m) { return m.slot == g.max.slot; });
      MappedBid fake = it->mapped == 1 ? 2 : 1;
      Drbg rng("era/tamper/substitute/" + honest.config.seed);
      const paillier::PublicKey& apub = w.auctioneer.key.public_key();
      it->r1 = paillier::sample_randomness(apub, rng).r;
      auto c = paillier::encrypt(apub, paillier::Plaintext{mpz_class(static_cast<unsigned long>(fake))},
                                 paillier::Randomness{it->r1});
      std::uint64_t seq = *w.board.commitment_seq_for_slot(g.max.slot);
      auto post = *w.board.at(seq).as<bulletin::CommitmentPost>();
      post.bid = c.value;
      w.board.rewrite({Board::Rewrite{seq, std::move(post), &net.sign_key}});
      culprits.push_back(net.name);
      break;
    }
  }
  execute(w, plan);
  return TamperResult{std::move(w), std::move(culprits)};
}

// ---------------------------------------------------------------------------
// Privacy scan over the serialized board: no value field may equal an
// original bid or an identity that was never revealed. Structural fields
// (seq, slot, test-set id, the outcome itself) are not scanned.

struct PrivacyFinding {
  std::uint64_t seq = 0;
  std::string field;
};

inline std::vector<PrivacyFinding> privacy_scan(std::string_view serialized,
                                                const std::vector<Cents>& forbidden_bids,
                                                const std::vector<std::uint64_t>& forbidden_identities) {
  Board board = Board::parse(serialized);
  std::set<mpz_class> forbidden;
  for (Cents b : forbidden_bids) forbidden.insert(mpz_class(static_cast<long>(b)));
  for (std::uint64_t s : forbidden_identities) forbidden.insert(mpz_class(static_cast<unsigned long>(s)));
  std::vector<PrivacyFinding> out;
  auto check = [&](std::uint64_t seq, const char* field, const mpz_class& v) {
    if (forbidden.count(v)) out.push_back(PrivacyFinding{seq, field});
  };
  for (const auto& p : board.posts()) {
    if (const auto* ts = p.as<bulletin::TestSetPost>()) {
      for (const auto& e : ts->entries) check(p.seq, "test-set entry", e);
    } else if (const auto* c = p.as<bulletin::CommitmentPost>()) {
      check(p.seq, "bid ciphertext", c->bid);
      check(p.seq, "identity ciphertext", c->identity);
    } else if (const auto* r = p.as<bulletin::WinnerReveal>()) {
      check(p.seq, "r2", r->r2);
    } else if (const auto* r = p.as<bulletin::PaymentReveal>()) {
      check(p.seq, "r1", r->r1);
      check(p.seq, "mapped", mpz_class(static_cast<unsigned long>(r->mapped)));
      check(p.seq, "attestation", r->attestation.e);
      check(p.seq, "attestation", r->attestation.s);
    }
    check(p.seq, "signature", p.signature.e);
    check(p.seq, "signature", p.signature.s);
  }
  return out;
}

// Bids other than the published price and identities other than the winner's.
inline std::pair<std::vector<Cents>, std::vector<std::uint64_t>> privacy_forbidden(const World& w) {
  std::vector<Cents> bids;
  std::vector<std::uint64_t> ids;
  for (const auto& b : w.bidders) {
    if (!w.outcome || b.bid != w.outcome->payment) bids.push_back(b.bid);
    if (!w.outcome || b.identity != w.outcome->winner_identity) ids.push_back(b.identity);
  }
  return {std::move(bids), std::move(ids)};
}

}  // namespace era::auction
