#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "era/errors.hpp"
#include "era/ope.hpp"

namespace era {

enum class Assignment { kRoundRobin, kRandom };

// World configuration. Flat key=value text, '#' starts a comment.
struct Config {
  ope::Cents z_min_cents = 1;
  ope::Cents z_max_cents = 10000;
  ope::Cents z_step_cents = 1;
  unsigned t = 32;
  unsigned key_bits = 1024;
  unsigned group_bits = 1024;
  std::size_t l = 10;
  std::size_t w = 2;
  std::string seed = "1";
  Assignment assignment = Assignment::kRoundRobin;

  friend bool operator==(const Config&, const Config&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::uint64_t parse_positive(std::string_view key, const std::string& value) {
  std::uint64_t v = 0;
  if (value.empty()) throw ConfigError("config: empty value for " + std::string(key));
  for (char c : value) {
    if (c < '0' || c > '9') throw ConfigError("config: " + std::string(key) + " must be a non-negative integer");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
    if (v > (1ull << 62)) throw ConfigError("config: " + std::string(key) + " out of range");
  }
  return v;
}

}  // namespace detail

// Applies one key=value pair; used by the file parser and CLI overrides.
inline void apply_setting(Config& cfg, std::string_view key, const std::string& value) {
  auto num = [&] { return detail::parse_positive(key, value); };
  if (key == "z_min_cents") cfg.z_min_cents = static_cast<ope::Cents>(num());
  else if (key == "z_max_cents") cfg.z_max_cents = static_cast<ope::Cents>(num());
  else if (key == "z_step_cents") cfg.z_step_cents = static_cast<ope::Cents>(num());
  else if (key == "t") cfg.t = static_cast<unsigned>(num());
  else if (key == "key_bits") cfg.key_bits = static_cast<unsigned>(num());
  else if (key == "group_bits") cfg.group_bits = static_cast<unsigned>(num());
  else if (key == "l") cfg.l = static_cast<std::size_t>(num());
  else if (key == "w") cfg.w = static_cast<std::size_t>(num());
  else if (key == "seed") {
    if (value.empty()) throw ConfigError("config: empty seed");
    cfg.seed = value;
  } else if (key == "assignment") {
    if (value == "round_robin") cfg.assignment = Assignment::kRoundRobin;
    else if (value == "random") cfg.assignment = Assignment::kRandom;
    else throw ConfigError("config: assignment must be round_robin or random");
  } else {
    throw ConfigError("config: unknown key " + std::string(key));
  }
}

// Cross-field checks: the bid space must fit under 2^t, mapped bids must be
// valid OT messages (< p) and range proofs need 2^t < n/2.
inline void validate(const Config& cfg) {
  if (cfg.l == 0) throw ConfigError("config: l must be at least 1");
  if (cfg.w == 0) throw ConfigError("config: w must be at least 1");
  if (cfg.t == 0 || cfg.t > 62) throw ConfigError("config: t must be in [1, 62]");
  if (cfg.key_bits < cfg.t + 3) throw ConfigError("config: key_bits too small for t (need 2^t < n/2)");
  if (cfg.group_bits < cfg.t + 2) throw ConfigError("config: group_bits too small for t (mapped bids must be < p)");
  if (cfg.key_bits < 16 || cfg.group_bits < 16) throw ConfigError("config: key_bits and group_bits must be >= 16");
  auto space = ope::build_bid_space(cfg.z_min_cents, cfg.z_max_cents, cfg.z_step_cents);
  if (((std::uint64_t{1} << cfg.t) - 1) < space.z()) {
    throw ConfigError("config: 2^t - 1 is smaller than the bid space");
  }
  // identities are 1..l and must be valid plaintexts under every n_j
  if (cfg.key_bits < 64 && (std::uint64_t{1} << (cfg.key_bits - 1)) <= cfg.l) {
    throw ConfigError("config: l too large for key_bits");
  }
}

inline Config parse_config(std::istream& in) {
  Config cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string body = detail::trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(cfg, detail::trim(std::string_view(body).substr(0, eq)),
                  detail::trim(std::string_view(body).substr(eq + 1)));
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse_config(in);
}

inline std::string to_text(const Config& cfg) {
  std::ostringstream out;
  out << "z_min_cents=" << cfg.z_min_cents << '\n'
      << "z_max_cents=" << cfg.z_max_cents << '\n'
      << "z_step_cents=" << cfg.z_step_cents << '\n'
      << "t=" << cfg.t << '\n'
      << "key_bits=" << cfg.key_bits << '\n'
      << "group_bits=" << cfg.group_bits << '\n'
      << "l=" << cfg.l << '\n'
      << "w=" << cfg.w << '\n'
      << "seed=" << cfg.seed << '\n'
      << "assignment=" << (cfg.assignment == Assignment::kRandom ? "random" : "round_robin") << '\n';
  return out.str();
}

}  // namespace era
