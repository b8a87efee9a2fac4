#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "era/bigint.hpp"
#include "era/errors.hpp"
#include "era/group.hpp"
#include "era/ot.hpp"
#include "era/rng.hpp"
#include "era/schnorr.hpp"

namespace era::ope {

using Cents = std::int64_t;
using MappedBid = std::uint64_t;

// The finite set of admissible bids, highest first.
struct BidSpace {
  Cents min = 0;
  Cents max = 0;
  Cents step = 0;
  std::vector<Cents> values;

  std::size_t z() const { return values.size(); }

  // 0-based position in the descending list.
  std::optional<std::size_t> index_of(Cents bid) const {
    if (bid < min || bid > max || (max - bid) % step != 0) return std::nullopt;
    return static_cast<std::size_t>((max - bid) / step);
  }
};

inline BidSpace build_bid_space(Cents min_cents, Cents max_cents, Cents step_cents) {
  if (min_cents <= 0 || max_cents < min_cents) {
    throw ConfigError("bid space: need 0 < min <= max");
  }
  if (step_cents <= 0) throw ConfigError("bid space: step must be positive");
  if ((max_cents - min_cents) % step_cents != 0) {
    throw ConfigError("bid space: step does not divide (max - min)");
  }
  BidSpace space{min_cents, max_cents, step_cents, {}};
  space.values.reserve(static_cast<std::size_t>((max_cents - min_cents) / step_cents + 1));
  for (Cents v = max_cents; v >= min_cents; v -= step_cents) space.values.push_back(v);
  return space;
}

// Order-preserving injection of the bid space into [1, 2^t - 1].
class OpeTable {
 public:
  OpeTable() = default;

  OpeTable(std::vector<Cents> originals, std::vector<MappedBid> mapped, unsigned t,
           std::string seed)
      : originals_(std::move(originals)),
        mapped_(std::move(mapped)),
        t_(t),
        seed_(std::move(seed)) {
    if (originals_.size() != mapped_.size()) {
      throw DomainError("ope table: column lengths differ");
    }
    forward_.reserve(originals_.size());
    inverse_.reserve(mapped_.size());
    messages_.reserve(mapped_.size());
    for (std::size_t i = 0; i < originals_.size(); ++i) {
      if (i > 0 && !(originals_[i] < originals_[i - 1] && mapped_[i] < mapped_[i - 1])) {
        throw DomainError("ope table: rows must be strictly descending in both columns");
      }
      if (mapped_[i] == 0 || (t_ < 64 && mapped_[i] >= (MappedBid{1} << t_))) {
        throw DomainError("ope table: mapped value outside [1, 2^t - 1]");
      }
      forward_.emplace(originals_[i], mapped_[i]);
      inverse_.emplace(mapped_[i], originals_[i]);
      messages_.emplace_back(static_cast<unsigned long>(mapped_[i]));
    }
  }

  std::size_t size() const { return originals_.size(); }
  unsigned t() const { return t_; }
  const std::string& seed() const { return seed_; }
  const std::vector<Cents>& originals() const { return originals_; }
  const std::vector<MappedBid>& mapped() const { return mapped_; }

  // OT messages in canonical descending-bid order.
  const std::vector<mpz_class>& messages() const { return messages_; }

  MappedBid map(Cents bid) const {
    auto it = forward_.find(bid);
    if (it == forward_.end()) throw DomainError("ope: bid not in the bid space");
    return it->second;
  }

  Cents unmap(MappedBid mapped) const {
    auto it = inverse_.find(mapped);
    if (it == inverse_.end()) throw DomainError("ope: unknown mapped bid");
    return it->second;
  }

  bool contains_mapped(MappedBid mapped) const { return inverse_.count(mapped) != 0; }

  // Two columns, tab separated: cents, mapped value in hex. Descending.
  void persist(std::ostream& out) const {
    for (std::size_t i = 0; i < originals_.size(); ++i) {
      out << originals_[i] << '\t' << hex(mpz_class(static_cast<unsigned long>(mapped_[i])))
          << '\n';
    }
  }

  std::string serialize() const {
    std::ostringstream out;
    persist(out);
    return out.str();
  }

  static OpeTable load(std::istream& in, unsigned t, std::string seed = {}) {
    std::vector<Cents> originals;
    std::vector<MappedBid> mapped;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw LoadError(line_no, "expected two columns");
      Cents cents = 0;
      try {
        std::size_t used = 0;
        cents = std::stoll(line.substr(0, tab), &used);
        if (used != tab) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw LoadError(line_no, "bad cents column");
      }
      auto value = parse_hex(std::string_view(line).substr(tab + 1));
      if (!value || !value->fits_ulong_p()) throw LoadError(line_no, "bad mapped column");
      originals.push_back(cents);
      mapped.push_back(value->get_ui());
    }
    try {
      return OpeTable(std::move(originals), std::move(mapped), t, std::move(seed));
    } catch (const DomainError& e) {
      throw LoadError(line_no, e.what());
    }
  }

 private:
  std::vector<Cents> originals_;
  std::vector<MappedBid> mapped_;
  unsigned t_ = 0;
  std::string seed_;
  std::unordered_map<Cents, MappedBid> forward_;
  std::unordered_map<MappedBid, Cents> inverse_;
  std::vector<mpz_class> messages_;
};

// z distinct draws from [1, 2^t - 1] (uniform, rejecting repeats), sorted and
// assigned so the largest bid gets the largest mapped value.
inline OpeTable generate_mapping(const BidSpace& space, unsigned t, std::string_view seed) {
  if (t == 0 || t > 63) throw CapacityError("ope: t must be in [1, 63]");
  const MappedBid capacity = (MappedBid{1} << t) - 1;
  if (capacity < space.z()) throw CapacityError("ope: 2^t - 1 < z");
  Drbg rng(std::string("era/ope/") + std::string(seed));
  std::unordered_set<MappedBid> seen;
  seen.reserve(space.z() * 2);
  std::vector<MappedBid> drawn;
  drawn.reserve(space.z());
  while (drawn.size() < space.z()) {
    MappedBid v = rng.uniform_u64(capacity) + 1;
    if (seen.insert(v).second) drawn.push_back(v);
  }
  std::sort(drawn.begin(), drawn.end(), std::greater<>());
  return OpeTable(space.values, std::move(drawn), t, std::string(seed));
}

// Mapped-bid fetch: the agent answers an OT request with the whole mapped
// column. Only y reaches the agent.
template <RandomSource R>
ot::Batch serve_mapped_bids(const OpeTable& table, const ot::Request& request,
                            const GroupParams& gp, R& rng) {
  return ot::respond(request.y, table.messages(), gp, rng);
}

// Message the agent signs when vouching for OPES(payment).
inline std::string attestation_message(Cents payment, MappedBid mapped) {
  return "era/agent-attestation\t" + std::to_string(payment) + "\t" +
         hex(mpz_class(static_cast<unsigned long>(mapped)));
}

struct Attestation {
  Cents payment = 0;
  MappedBid mapped = 0;
  schnorr::Signature signature;
};

// The agent party: owns the bid space and the private mapping table.
class Agent {
 public:
  Agent(BidSpace space, OpeTable table, GroupParams gp, schnorr::SigningKey key)
      : space_(std::move(space)),
        table_(std::move(table)),
        gp_(std::move(gp)),
        key_(std::move(key)) {}

  const BidSpace& space() const { return space_; }
  const OpeTable& table() const { return table_; }
  const mpz_class& attestation_key() const { return key_.public_key(); }

  template <RandomSource R>
  ot::Batch serve(const ot::Request& request, R& rng) {
    ++served_;
    return serve_mapped_bids(table_, request, gp_, rng);
  }

  // Payment resolution: the auctioneer hands over b_sec-hat.
  Cents unmap(MappedBid mapped) {
    unmap_requests_.push_back(mapped);
    return table_.unmap(mapped);
  }

  // Verifier query: OPES(payment), signed.
  std::optional<Attestation> attest(Cents payment) const {
    if (!space_.index_of(payment)) return std::nullopt;
    MappedBid mapped = table_.map(payment);
    return Attestation{payment, mapped,
                       schnorr::sign(gp_, key_, attestation_message(payment, mapped))};
  }

  std::size_t served() const { return served_; }
  const std::vector<MappedBid>& unmap_requests() const { return unmap_requests_; }

 private:
  BidSpace space_;
  OpeTable table_;
  GroupParams gp_;
  schnorr::SigningKey key_;
  std::size_t served_ = 0;
  std::vector<MappedBid> unmap_requests_;
};

}  // namespace era::ope
