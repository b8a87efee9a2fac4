#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/errors.hpp"
#include "era/group.hpp"
#include "era/ope.hpp"
#include "era/schnorr.hpp"

// Certificated bulletin board: an append-only, signed, publicly readable log.
//
// On disk: one header line, then one line per post,
//
//   <seq> TAB <author> TAB <Kind> TAB <payload fields...> TAB <e>:<s>
//
// Big integers are canonical hex; sequence numbers, slots, ids, identities and
// cents are decimal. The signature covers the line up to (not including) the
// final tab.
namespace era::bulletin {

using ope::Cents;
using ope::MappedBid;

inline constexpr std::string_view kAuctioneer = "auctioneer";
inline constexpr std::string_view kHeaderMagic = "era-board v1";

enum class PostKind { kTestSet, kCommitment, kMark, kOutcome, kReveal };
enum class MarkRole { kMax, kSec };

inline const char* to_string(PostKind k) {
  switch (k) {
    case PostKind::kTestSet: return "TestSet";
    case PostKind::kCommitment: return "Commitment";
    case PostKind::kMark: return "Mark";
    case PostKind::kOutcome: return "Outcome";
    case PostKind::kReveal: return "Reveal";
  }
  return "?";
}

inline const char* to_string(MarkRole r) { return r == MarkRole::kMax ? "max" : "sec"; }

struct TestSetPost {
  std::uint32_t id = 0;
  std::vector<mpz_class> entries;
};

// COM_i = (c_i, id_i); the author is the owning ad network.
struct CommitmentPost {
  std::uint32_t slot = 0;  // registration index, public
  mpz_class bid;           // E_n(mapped bid, r1)
  mpz_class identity;      // E_{n_j}(s_i, r2)
};

struct MarkPost {
  MarkRole role = MarkRole::kMax;
  std::uint64_t commitment_seq = 0;
};

struct OutcomePost {
  std::uint64_t winner_identity = 0;
  Cents payment = 0;
  std::string winner_network;
};

// Published by the winner's ad network.
struct WinnerReveal {
  std::uint64_t commitment_seq = 0;
  mpz_class r2;
};

// Published by the auctioneer; carries the agent's signed OPES(payment).
struct PaymentReveal {
  std::uint64_t commitment_seq = 0;
  mpz_class r1;
  MappedBid mapped = 0;
  Cents payment = 0;
  schnorr::Signature attestation;
};

using Payload =
    std::variant<TestSetPost, CommitmentPost, MarkPost, OutcomePost, WinnerReveal, PaymentReveal>;

inline PostKind kind_of(const Payload& p) {
  switch (p.index()) {
    case 0: return PostKind::kTestSet;
    case 1: return PostKind::kCommitment;
    case 2: return PostKind::kMark;
    case 3: return PostKind::kOutcome;
    default: return PostKind::kReveal;
  }
}

struct SignedPost {
  std::uint64_t seq = 0;
  std::string author;
  Payload payload;
  schnorr::Signature signature;

  PostKind kind() const { return kind_of(payload); }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&payload);
  }
};

struct NetworkEntry {
  std::string name;
  mpz_class paillier_n;
  mpz_class sign_key;

  friend bool operator==(const NetworkEntry&, const NetworkEntry&) = default;
};

struct Header {
  GroupParams group;
  unsigned t = 0;
  mpz_class auctioneer_n;
  mpz_class auctioneer_key;
  mpz_class agent_key;
  std::vector<NetworkEntry> networks;

  friend bool operator==(const Header&, const Header&) = default;

  const NetworkEntry* network(std::string_view name) const {
    for (const auto& n : networks) {
      if (n.name == name) return &n;
    }
    return nullptr;
  }

  std::optional<mpz_class> sign_key_of(std::string_view author) const {
    if (author == kAuctioneer) return auctioneer_key;
    if (const auto* n = network(author)) return n->sign_key;
    return std::nullopt;
  }
};

struct Filter {
  std::optional<PostKind> kind;
  std::optional<std::string> author;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::optional<std::uint64_t> parse_u64(std::string_view text) {
  if (text.empty() || text.size() > 19) return std::nullopt;
  if (text.size() > 1 && text.front() == '0') return std::nullopt;
  std::uint64_t v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

inline std::optional<mpz_class> parse_hex_field(std::string_view text) { return parse_hex(text); }

inline std::string mapped_hex(MappedBid v) {
  return hex(mpz_class(static_cast<unsigned long>(v)));
}

inline bool is_valid_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

inline std::string encode_header(const Header& h) {
  std::string out(kHeaderMagic);
  out += "\tt=" + std::to_string(h.t);
  out += "\tgroup=" + hex(h.group.p) + "," + hex(h.group.rho) + "," + hex(h.group.g) + "," +
         hex(h.group.h);
  out += "\tauctioneer=" + hex(h.auctioneer_n) + "," + hex(h.auctioneer_key);
  out += "\tagent=" + hex(h.agent_key);
  for (const auto& n : h.networks) {
    out += "\tnetwork=" + n.name + "," + hex(n.paillier_n) + "," + hex(n.sign_key);
  }
  return out;
}

inline std::optional<Header> decode_header(std::string_view line, std::string& why) {
  auto fields = detail::split(line, '\t');
  if (fields.empty() || fields[0] != kHeaderMagic) {
    why = "missing board header";
    return std::nullopt;
  }
  Header h;
  bool have_t = false, have_group = false, have_auctioneer = false, have_agent = false;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    auto eq = fields[i].find('=');
    if (eq == std::string_view::npos) {
      why = "malformed header field";
      return std::nullopt;
    }
    auto key = fields[i].substr(0, eq);
    auto parts = detail::split(fields[i].substr(eq + 1), ',');
    auto big = [&](std::size_t k) -> std::optional<mpz_class> {
      return k < parts.size() ? parse_hex(parts[k]) : std::nullopt;
    };
    if (key == "t") {
      auto v = detail::parse_u64(parts[0]);
      if (!v || parts.size() != 1) break;
      h.t = static_cast<unsigned>(*v);
      have_t = true;
    } else if (key == "group" && parts.size() == 4) {
      auto p = big(0), rho = big(1), g = big(2), hh = big(3);
      if (!p || !rho || !g || !hh) break;
      h.group = GroupParams{*p, *rho, *g, *hh};
      have_group = true;
    } else if (key == "auctioneer" && parts.size() == 2) {
      auto n = big(0), k = big(1);
      if (!n || !k) break;
      h.auctioneer_n = *n;
      h.auctioneer_key = *k;
      have_auctioneer = true;
    } else if (key == "agent" && parts.size() == 1) {
      auto k = big(0);
      if (!k) break;
      h.agent_key = *k;
      have_agent = true;
    } else if (key == "network" && parts.size() == 3) {
      auto n = big(1), k = big(2);
      if (!n || !k || !detail::is_valid_name(parts[0]) || parts[0] == kAuctioneer) break;
      if (h.network(parts[0])) {
        why = "duplicate network in header";
        return std::nullopt;
      }
      h.networks.push_back(NetworkEntry{std::string(parts[0]), *n, *k});
    } else {
      break;
    }
    if (i + 1 == fields.size()) {
      if (!have_t || !have_group || !have_auctioneer || !have_agent) break;
      return h;
    }
  }
  why = "malformed board header";
  return std::nullopt;
}

// Everything but the signature field.
inline std::string encode_body(const SignedPost& post) {
  std::string out = std::to_string(post.seq) + "\t" + post.author + "\t" + to_string(post.kind());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TestSetPost>) {
          out += "\t" + std::to_string(p.id) + "\t";
          for (std::size_t i = 0; i < p.entries.size(); ++i) {
            if (i) out += ",";
            out += hex(p.entries[i]);
          }
        } else if constexpr (std::is_same_v<T, CommitmentPost>) {
          out += "\t" + std::to_string(p.slot) + "\t" + hex(p.bid) + "\t" + hex(p.identity);
        } else if constexpr (std::is_same_v<T, MarkPost>) {
          out += std::string("\t") + to_string(p.role) + "\t" + std::to_string(p.commitment_seq);
        } else if constexpr (std::is_same_v<T, OutcomePost>) {
          out += "\t" + std::to_string(p.winner_identity) + "\t" + std::to_string(p.payment) +
                 "\t" + p.winner_network;
        } else if constexpr (std::is_same_v<T, WinnerReveal>) {
          out += "\twinner\t" + std::to_string(p.commitment_seq) + "\t" + hex(p.r2);
        } else {
          out += "\tpayment\t" + std::to_string(p.commitment_seq) + "\t" + hex(p.r1) + "\t" +
                 detail::mapped_hex(p.mapped) + "\t" + std::to_string(p.payment) + "\t" +
                 p.attestation.encode();
        }
      },
      post.payload);
  return out;
}

inline std::string encode_post(const SignedPost& post) {
  return encode_body(post) + "\t" + post.signature.encode();
}

// Parses the payload fields of a post line (everything after the kind).
inline std::optional<Payload> decode_payload(std::string_view kind,
                                             const std::vector<std::string_view>& f,
                                             std::string& why) {
  auto u64 = [](std::string_view s) { return detail::parse_u64(s); };
  auto cents = [](std::string_view s) -> std::optional<Cents> {
    auto v = detail::parse_u64(s);
    if (!v || *v > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
    return static_cast<Cents>(*v);
  };
  why = std::string("malformed ") + std::string(kind) + " payload";
  if (kind == "TestSet") {
    if (f.size() != 2) return std::nullopt;
    auto id = u64(f[0]);
    if (!id || *id > UINT32_MAX) return std::nullopt;
    TestSetPost p;
    p.id = static_cast<std::uint32_t>(*id);
    for (auto part : detail::split(f[1], ',')) {
      auto v = parse_hex(part);
      if (!v) {
        why = "bad hex in TestSet payload";
        return std::nullopt;
      }
      p.entries.push_back(std::move(*v));
    }
    return p;
  }
  if (kind == "Commitment") {
    if (f.size() != 3) return std::nullopt;
    auto slot = u64(f[0]);
    auto bid = parse_hex(f[1]);
    auto identity = parse_hex(f[2]);
    if (!slot || *slot > UINT32_MAX || !bid || !identity) return std::nullopt;
    return CommitmentPost{static_cast<std::uint32_t>(*slot), std::move(*bid), std::move(*identity)};
  }
  if (kind == "Mark") {
    if (f.size() != 2 || (f[0] != "max" && f[0] != "sec")) return std::nullopt;
    auto seq = u64(f[1]);
    if (!seq) return std::nullopt;
    return MarkPost{f[0] == "max" ? MarkRole::kMax : MarkRole::kSec, *seq};
  }
  if (kind == "Outcome") {
    if (f.size() != 3 || !detail::is_valid_name(f[2])) return std::nullopt;
    auto winner = u64(f[0]);
    auto pay = cents(f[1]);
    if (!winner || !pay) return std::nullopt;
    return OutcomePost{*winner, *pay, std::string(f[2])};
  }
  if (kind == "Reveal") {
    if (f.size() == 3 && f[0] == "winner") {
      auto seq = u64(f[1]);
      auto r2 = parse_hex(f[2]);
      if (!seq || !r2) return std::nullopt;
      return WinnerReveal{*seq, std::move(*r2)};
    }
    if (f.size() == 6 && f[0] == "payment") {
      auto seq = u64(f[1]);
      auto r1 = parse_hex(f[2]);
      auto mapped = parse_hex(f[3]);
      auto pay = cents(f[4]);
      auto sig = schnorr::Signature::decode(f[5]);
      if (!seq || !r1 || !mapped || !mapped->fits_ulong_p() || !pay || !sig) return std::nullopt;
      return PaymentReveal{*seq, std::move(*r1), mapped->get_ui(), *pay, std::move(*sig)};
    }
    return std::nullopt;
  }
  why = "unknown post kind";
  return std::nullopt;
}

class Board {
 public:
  Board() = default;
  explicit Board(Header header) : header_(std::move(header)) {}

  const Header& header() const { return header_; }
  const std::vector<SignedPost>& posts() const { return posts_; }
  std::size_t size() const { return posts_.size(); }
  std::uint64_t next_seq() const { return posts_.size() + 1; }

  const SignedPost& at(std::uint64_t seq) const {
    if (seq == 0 || seq > posts_.size()) throw LookupError("board: unknown seq " + std::to_string(seq));
    return posts_[seq - 1];
  }

  // Appends a signed record. Throws AuthorizationError for unregistered
  // authors or records outside the author's role, SigningError when the key
  // does not match the registered public key.
  const SignedPost& post(std::string_view author, const schnorr::SigningKey& key, Payload payload) {
    SignedPost record{next_seq(), std::string(author), std::move(payload), {}};
    check_record(record);
    auto registered = header_.sign_key_of(author);
    if (key.public_key() != *registered) {
      throw SigningError("board: signing key does not match registration of " + std::string(author));
    }
    record.signature = schnorr::sign(header_.group, key, encode_body(record));
    index(record);
    posts_.push_back(std::move(record));
    return posts_.back();
  }

  bool verify_post(std::uint64_t seq) const {
    const SignedPost& record = at(seq);
    auto key = header_.sign_key_of(record.author);
    if (!key) return false;
    return schnorr::verify(header_.group, *key, encode_body(record), record.signature);
  }

  std::vector<const SignedPost*> read(const Filter& filter = {}) const {
    std::vector<const SignedPost*> out;
    for (const auto& p : posts_) {
      if (filter.kind && p.kind() != *filter.kind) continue;
      if (filter.author && p.author != *filter.author) continue;
      out.push_back(&p);
    }
    return out;
  }

  const TestSetPost* test_set(std::uint32_t id) const {
    auto it = test_sets_.find(id);
    return it == test_sets_.end() ? nullptr : posts_[it->second - 1].as<TestSetPost>();
  }

  std::optional<std::uint64_t> commitment_seq_for_slot(std::uint32_t slot) const {
    auto it = commitment_slots_.find(slot);
    if (it == commitment_slots_.end()) return std::nullopt;
    return it->second;
  }

  const SignedPost* mark(MarkRole role) const {
    auto it = marks_.find(role);
    return it == marks_.end() ? nullptr : &posts_[it->second - 1];
  }

  const SignedPost* outcome() const {
    return outcome_seq_ ? &posts_[*outcome_seq_ - 1] : nullptr;
  }

  std::vector<const SignedPost*> commitments() const {
    std::vector<const SignedPost*> out;
    for (const auto& [slot, seq] : commitment_slots_) out.push_back(&posts_[seq - 1]);
    return out;
  }

  // Copy holding only the first `count` posts.
  Board prefix(std::size_t count) const {
    Board out(header_);
    for (std::size_t i = 0; i < count && i < posts_.size(); ++i) {
      out.index(posts_[i]);
      out.posts_.push_back(posts_[i]);
    }
    return out;
  }

  struct Rewrite {
    std::uint64_t seq = 0;
    Payload payload;
    const schnorr::SigningKey* key = nullptr;
  };

  // Fault-injection only: replaces the payloads of existing records and
  // re-signs them with their authors' keys, i.e. the authors had posted these
  // payloads in the first place. All rules are re-checked on the result.
  void rewrite(std::vector<Rewrite> edits) {
    std::map<std::uint64_t, Rewrite*> by_seq;
    for (auto& e : edits) {
      at(e.seq);
      by_seq[e.seq] = &e;
    }
    Board rebuilt(header_);
    for (const auto& p : posts_) {
      auto it = by_seq.find(p.seq);
      if (it != by_seq.end()) {
        rebuilt.post(p.author, *it->second->key, std::move(it->second->payload));
      } else {
        rebuilt.check_record(p);
        rebuilt.index(p);
        rebuilt.posts_.push_back(p);
      }
    }
    *this = std::move(rebuilt);
  }

  std::string serialize() const {
    std::string out = encode_header(header_);
    out.push_back('\n');
    for (const auto& p : posts_) {
      out += encode_post(p);
      out.push_back('\n');
    }
    return out;
  }

  void persist(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("board: cannot write " + path);
    out << serialize();
    if (!out) throw Error("board: write failed for " + path);
  }

  // Full validation: header, canonical encoding, gap-free sequence numbers,
  // authorship rules and every signature.
  static Board parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) -> bool {
      if (pos >= text.size()) return false;
      auto nl = text.find('\n', pos);
      ++line_no;
      if (nl == std::string_view::npos) throw LoadError(line_no, "truncated line (no newline)");
      line = text.substr(pos, nl - pos);
      pos = nl + 1;
      return true;
    };
    std::string_view line;
    if (!next_line(line)) throw LoadError(1, "empty board file");
    std::string why;
    auto header = decode_header(line, why);
    if (!header) throw LoadError(line_no, why);
    if (!valid_params(header->group)) throw LoadError(line_no, "invalid group parameters");

    Board board(std::move(*header));
    while (next_line(line)) {
      auto fields = detail::split(line, '\t');
      if (fields.size() < 4) throw LoadError(line_no, "malformed post line");
      auto seq = detail::parse_u64(fields[0]);
      if (!seq) throw LoadError(line_no, "bad sequence number");
      if (*seq != board.next_seq()) {
        throw LoadError(line_no, "sequence gap: expected " + std::to_string(board.next_seq()) +
                                     ", found " + std::to_string(*seq));
      }
      auto sig = schnorr::Signature::decode(fields.back());
      if (!sig) throw LoadError(line_no, "malformed signature field");
      std::vector<std::string_view> payload_fields(fields.begin() + 3, fields.end() - 1);
      auto payload = decode_payload(fields[2], payload_fields, why);
      if (!payload) throw LoadError(line_no, why);
      SignedPost record{*seq, std::string(fields[1]), std::move(*payload), std::move(*sig)};
      if (encode_post(record) != line) throw LoadError(line_no, "non-canonical encoding");
      try {
        board.check_record(record);
      } catch (const Error& e) {
        throw LoadError(line_no, e.what());
      }
      auto key = board.header_.sign_key_of(record.author);
      if (!schnorr::verify(board.header_.group, *key, encode_body(record), record.signature)) {
        throw LoadError(line_no, "bad signature");
      }
      board.index(record);
      board.posts_.push_back(std::move(record));
    }
    return board;
  }

  static Board load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(0, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

 private:
  // Authorship and reference rules shared by post() and parse().
  void check_record(const SignedPost& record) const {
    const bool is_auctioneer = record.author == kAuctioneer;
    const bool is_network = header_.network(record.author) != nullptr;
    if (!is_auctioneer && !is_network) {
      throw AuthorizationError("board: " + record.author + " is not a registered author");
    }
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, TestSetPost> || std::is_same_v<T, OutcomePost> ||
                        std::is_same_v<T, PaymentReveal>) {
            if (!is_auctioneer) {
              throw AuthorizationError(std::string("board: only the auctioneer posts ") +
                                       to_string(record.kind()));
            }
          } else {
            if (!is_network) {
              throw AuthorizationError(std::string("board: only ad networks post ") +
                                       to_string(record.kind()));
            }
          }
          if constexpr (std::is_same_v<T, TestSetPost>) {
            if (test_sets_.count(p.id)) throw ProtocolError("board: duplicate test set id");
            if (p.entries.size() != header_.t) throw ProtocolError("board: test set size != t");
          } else if constexpr (std::is_same_v<T, CommitmentPost>) {
            if (commitment_slots_.count(p.slot)) throw ProtocolError("board: duplicate commitment slot");
          } else if constexpr (std::is_same_v<T, MarkPost>) {
            if (marks_.count(p.role)) throw ProtocolError("board: role already marked");
            const SignedPost* target = existing(p.commitment_seq);
            if (!target || target->kind() != PostKind::kCommitment) {
              throw ProtocolError("board: mark does not reference a commitment");
            }
            if (target->author != record.author) {
              throw AuthorizationError("board: networks may only mark their own commitments");
            }
          } else if constexpr (std::is_same_v<T, OutcomePost>) {
            if (outcome_seq_) throw ProtocolError("board: outcome already posted");
          } else if constexpr (std::is_same_v<T, WinnerReveal> || std::is_same_v<T, PaymentReveal>) {
            const SignedPost* target = existing(p.commitment_seq);
            if (!target || target->kind() != PostKind::kCommitment) {
              throw ProtocolError("board: reveal does not reference a commitment");
            }
            if constexpr (std::is_same_v<T, WinnerReveal>) {
              if (target->author != record.author) {
                throw AuthorizationError("board: networks reveal only their own commitments");
              }
            }
          }
        },
        record.payload);
  }

  const SignedPost* existing(std::uint64_t seq) const {
    if (seq == 0 || seq > posts_.size()) return nullptr;
    return &posts_[seq - 1];
  }

  void index(const SignedPost& record) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, TestSetPost>) {
            test_sets_[p.id] = record.seq;
          } else if constexpr (std::is_same_v<T, CommitmentPost>) {
            commitment_slots_[p.slot] = record.seq;
          } else if constexpr (std::is_same_v<T, MarkPost>) {
            marks_[p.role] = record.seq;
          } else if constexpr (std::is_same_v<T, OutcomePost>) {
            outcome_seq_ = record.seq;
          }
        },
        record.payload);
  }

  Header header_;
  std::vector<SignedPost> posts_;
  std::map<std::uint32_t, std::uint64_t> test_sets_;
  std::map<std::uint32_t, std::uint64_t> commitment_slots_;
  std::map<MarkRole, std::uint64_t> marks_;
  std::optional<std::uint64_t> outcome_seq_;
};

}  // namespace era::bulletin
