#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "era/auction.hpp"
#include "era/bench.hpp"

// Subcommands behind tools/era. Exit codes: 0 ok / accept, 1 protocol failure
// or verification reject, 2 bad input (config, files, fault names).
namespace era::cli {

inline constexpr int kOk = 0;
inline constexpr int kReject = 1;
inline constexpr int kBadInput = 2;

namespace detail {

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out.flush()) throw ConfigError("write failed: " + path);
}

inline std::string join(const std::vector<std::string>& items) {
  if (items.empty()) return "-";
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

inline auction::OrderingChallenge challenge_for(std::size_t l, const std::optional<std::string>& seed) {
  std::size_t n = l == 0 ? 0 : l - 1;
  return seed ? auction::OrderingChallenge::shuffled(n, *seed) : auction::OrderingChallenge::canonical(n);
}

// Sibling files of a board.
inline std::string reveals_path(const std::string& board) { return board + ".reveals"; }
inline std::string state_path(const std::string& board) { return board + ".state"; }
inline std::string agent_path(const std::string& board) { return board + ".agent"; }
inline std::string auctioneer_path(const std::string& board) { return board + ".auctioneer"; }
inline std::string network_path(const std::string& board, const std::string& name) {
  return board + ".net-" + name;
}

}  // namespace detail

struct RunOptions {
  std::string config_path;
  std::string board_path = "board.log";
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> challenge_seed;
};

inline Config resolve_config(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  Config cfg = load_config(path);
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
  validate(cfg);
  return cfg;
}

inline auction::World build_world(const Config& cfg, const std::optional<std::string>& challenge_seed) {
  auction::World w = auction::init_auction(cfg);
  w.challenge = detail::challenge_for(cfg.l, challenge_seed);
  auction::execute(w);
  return w;
}

// Full init -> execute -> resolve; writes the board and every party's state.
inline int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  Config cfg;
  try {
    cfg = resolve_config(opt.config_path, opt.overrides);
  } catch (const Error& e) {
    err << "era run: " << e.what() << "\n";
    return kBadInput;
  }
  try {
    auction::World w = build_world(cfg, opt.challenge_seed);
    const std::string& board = opt.board_path;
    w.board.persist(board);
    detail::write_file(detail::reveals_path(board), w.transcript.serialize());
    detail::write_file(detail::state_path(board), to_text(cfg));
    detail::write_file(detail::agent_path(board), w.agent.table().serialize());
    detail::write_file(detail::auctioneer_path(board), w.auctioneer.serialize());
    for (const auto& n : w.networks) detail::write_file(detail::network_path(board, n.name), n.serialize());
    out << "winner=" << w.outcome->winner_identity << " payment=" << w.outcome->payment
        << " network=" << w.outcome->winner_network << " board=" << board << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    err << "era run: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "era run: protocol failure: " << e.what() << "\n";
    return kReject;
  }
}

// Steps 1-2 from the board and the reveals transcript alone.
inline int cmd_verify(const std::string& board_path, const std::string& reveals_path,
                      const std::optional<std::string>& challenge_seed, std::ostream& out, std::ostream& err) {
  auto board_text = detail::read_file(board_path);
  if (!board_text) {
    err << "era verify: cannot read " << board_path << "\n";
    return kBadInput;
  }
  auto reveals_text = detail::read_file(reveals_path);
  if (!reveals_text) {
    err << "era verify: cannot read " << reveals_path << "\n";
    return kBadInput;
  }
  bulletin::Board board;
  auction::OrderingTranscript transcript;
  try {
    board = bulletin::Board::parse(*board_text);
    transcript = auction::OrderingTranscript::parse(*reveals_text,
                                                    paillier::PublicKey(board.header().auctioneer_n));
  } catch (const LoadError& e) {
    err << "era verify: unparseable input: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "era verify: unparseable input: " << e.what() << "\n";
    return kBadInput;
  }
  auto verdict = auction::verify_board(board, transcript,
                                       detail::challenge_for(board.commitments().size(), challenge_seed));
  if (verdict.accepted) {
    out << "accept\n";
    return kOk;
  }
  out << "reject step " << verdict.step << ": " << verdict.reason;
  if (verdict.comparison) out << " (comparison " << verdict.comparison << ", slot " << verdict.slot << ")";
  out << "\n";
  return kReject;
}

// Rebuilds the honest world from <board>.state, checks it reproduces the
// board byte for byte, injects the fault and writes <out> and <out>.reveals.
inline int cmd_tamper(const std::string& board_path, const std::string& fault, const std::string& out_path,
                      const std::optional<std::string>& challenge_seed, std::ostream& out, std::ostream& err) {
  auction::FaultKind kind;
  try {
    kind = auction::parse_fault(fault);
  } catch (const HarnessError& e) {
    err << "era tamper: " << e.what() << "\n";
    return kBadInput;
  }
  auto board_text = detail::read_file(board_path);
  if (!board_text) {
    err << "era tamper: cannot read " << board_path << "\n";
    return kBadInput;
  }
  try {
    Config cfg = load_config(detail::state_path(board_path));
    validate(cfg);
    auction::World honest = build_world(cfg, challenge_seed);
    if (honest.board.serialize() != *board_text) {
      err << "era tamper: board does not match its state file\n";
      return kBadInput;
    }
    auto tampered = auction::tamper(honest, kind);
    tampered.world.board.persist(out_path);
    detail::write_file(detail::reveals_path(out_path), tampered.world.transcript.serialize());
    auto blamed = auction::patch_verify(tampered.world.auctioneer, tampered.world.board, tampered.world.results);
    out << "fault=" << auction::to_string(kind) << " injected=" << detail::join(tampered.culprits)
        << " blamed=" << detail::join(blamed) << " board=" << out_path << "\n";
    return kOk;
  } catch (const HarnessError& e) {
    err << "era tamper: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "era tamper: " << e.what() << "\n";
    return kBadInput;
  }
}

struct BenchOptions {
  std::vector<std::size_t> l{20000, 40000, 60000, 80000, 100000};
  std::vector<std::size_t> w{100};
  std::size_t reps = 3;
  std::string seed = "1";
  double window_ms = 1.0;
  std::vector<std::size_t> z_sweep;           // mapped_bid_gen rows
  unsigned ot_group_bits = 128;
  std::optional<std::string> costs_config;    // per-phase cost rows for this world
  std::optional<std::string> out_path;
};

inline int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  for (auto v : opt.l) {
    if (v == 0) { err << "era bench: l values must be positive\n"; return kBadInput; }
  }
  for (auto v : opt.w) {
    if (v == 0) { err << "era bench: w values must be positive\n"; return kBadInput; }
  }
  if (opt.reps == 0) { err << "era bench: reps must be positive\n"; return kBadInput; }
  std::ostringstream csv;
  csv << bench::kCsvHeader << "\n";
  try {
    auto space = ope::build_bid_space(1, 10000, 1);
    auto table = ope::generate_mapping(space, 32, opt.seed);
    for (auto l : opt.l) {
      for (auto w : opt.w) {
        for (std::size_t rep = 0; rep < opt.reps; ++rep) {
          csv << bench::csv_row(bench::measure_latency(l, w, rep, table, opt.seed, opt.window_ms)) << "\n";
        }
      }
    }
    if (!opt.z_sweep.empty()) {
      GroupParams gp = group_setup(opt.ot_group_bits, "bench/" + opt.seed);
      for (auto z : opt.z_sweep) {
        for (std::size_t rep = 0; rep < opt.reps; ++rep) {
          bench::CostReport c{"mapped_bid_gen", z, bench::mapped_bid_gen_ms(z, gp, 32, opt.seed), 0};
          c.storage_bytes = ope::generate_mapping(ope::build_bid_space(1, static_cast<ope::Cents>(z), 1), 32,
                                                  opt.seed).serialize().size();
          csv << bench::csv_row(c, 0, 0, z, rep) << "\n";
        }
      }
    }
    if (opt.costs_config) {
      Config cfg = load_config(*opt.costs_config);
      validate(cfg);
      for (std::size_t rep = 0; rep < opt.reps; ++rep) {
        for (const auto& c : bench::cost_reports(cfg)) {
          csv << bench::csv_row(c, cfg.l, cfg.w,
                                static_cast<std::size_t>((cfg.z_max_cents - cfg.z_min_cents) / cfg.z_step_cents + 1),
                                rep)
              << "\n";
        }
      }
    }
  } catch (const ConfigError& e) {
    err << "era bench: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "era bench: " << e.what() << "\n";
    return kReject;
  }
  if (opt.out_path) {
    try {
      detail::write_file(*opt.out_path, csv.str());
    } catch (const Error& e) {
      err << "era bench: " << e.what() << "\n";
      return kBadInput;
    }
  } else {
    out << csv.str();
  }
  return kOk;
}

// Byte counts of the board and of the state files written next to it.
inline int cmd_storage(const std::string& board_path, std::ostream& out, std::ostream& err) {
  auto board_text = detail::read_file(board_path);
  if (!board_text) {
    err << "era storage: cannot read " << board_path << "\n";
    return kBadInput;
  }
  bulletin::Board board;
  try {
    board = bulletin::Board::parse(*board_text);
  } catch (const Error& e) {
    err << "era storage: " << e.what() << "\n";
    return kBadInput;
  }
  auto size_of = [](const std::string& path) -> std::size_t {
    std::error_code ec;
    auto s = std::filesystem::file_size(path, ec);
    return ec ? 0 : static_cast<std::size_t>(s);
  };
  out << "board_bytes=" << board_text->size() << "\n";
  out << "auctioneer_bytes=" << size_of(detail::auctioneer_path(board_path)) << "\n";
  out << "agent_bytes=" << size_of(detail::agent_path(board_path)) << "\n";
  double sum = 0;
  for (const auto& n : board.header().networks) {
    auto b = size_of(detail::network_path(board_path, n.name));
    sum += static_cast<double>(b);
    out << "network_bytes." << n.name << "=" << b << "\n";
  }
  double mean = board.header().networks.empty() ? 0 : sum / static_cast<double>(board.header().networks.size());
  out << "network_mean_bytes=" << bench::detail::fmt(mean) << "\n";
  return kOk;
}

}  // namespace era::cli
