#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "era/cli.hpp"

namespace {

// Config keys that can be overridden straight from the command line.
const char* const kConfigKeys[] = {"z_min_cents", "z_max_cents", "z_step_cents", "t",    "key_bits",
                                   "group_bits",  "l",           "w",            "seed", "assignment"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"era: verifiable second-price ad auction simulator"};
  app.require_subcommand(1);

  era::cli::RunOptions run;
  std::map<std::string, std::string> run_flags;
  std::vector<std::string> run_sets;
  auto* run_cmd = app.add_subcommand("run", "initialize, execute and resolve one auction");
  run_cmd->add_option("config", run.config_path, "world config (key=value)")->required();
  run_cmd->add_option("--board", run.board_path, "board log to write");
  run_cmd->add_option("--challenge", run.challenge_seed, "seed for the test-set assignment");
  run_cmd->add_option("--set", run_sets, "override key=value");
  for (const char* key : kConfigKeys) run_cmd->add_option(std::string("--") + key, run_flags[key]);

  std::string board, reveals, fault, out_path;
  std::optional<std::string> challenge;
  auto* verify_cmd = app.add_subcommand("verify", "verify a board from public material");
  verify_cmd->add_option("board", board)->required();
  verify_cmd->add_option("reveals", reveals, "ordering transcript (default <board>.reveals)");
  verify_cmd->add_option("--challenge", challenge);

  auto* tamper_cmd = app.add_subcommand("tamper", "replay the auction with one injected fault");
  tamper_cmd->add_option("board", board)->required();
  tamper_cmd->add_option("fault", fault,
                         "wrong-winner | inflated-payment | swapped-marks | forged-internal-result | "
                         "commitment-substitution")
      ->required();
  tamper_cmd->add_option("--out", out_path, "tampered board (default <board>.tampered)");
  tamper_cmd->add_option("--challenge", challenge);

  era::cli::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "latency, mapped-bid and phase cost CSV");
  bench_cmd->add_option("--l", bench.l, "bidder counts")->delimiter(',');
  bench_cmd->add_option("--w", bench.w, "network counts")->delimiter(',');
  bench_cmd->add_option("--reps", bench.reps);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--window-ms", bench.window_ms, "timing window per trial");
  bench_cmd->add_option("--z", bench.z_sweep, "bid-space sizes for mapped-bid generation")->delimiter(',');
  bench_cmd->add_option("--ot-group-bits", bench.ot_group_bits);
  bench_cmd->add_option("--costs", bench.costs_config, "config for per-phase cost rows");
  bench_cmd->add_option("--out", bench.out_path, "CSV path (default stdout)");

  auto* storage_cmd = app.add_subcommand("storage", "per-party byte counts for a board");
  storage_cmd->add_option("board", board)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : era::cli::kBadInput;
  }

  if (*run_cmd) {
    for (const char* key : kConfigKeys) {
      if (run_cmd->count(std::string("--") + key)) run.overrides.emplace_back(key, run_flags[key]);
    }
    for (const auto& s : run_sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) {
        std::cerr << "era run: --set expects key=value\n";
        return era::cli::kBadInput;
      }
      run.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return era::cli::cmd_run(run, std::cout, std::cerr);
  }
  if (*verify_cmd) {
    if (reveals.empty()) reveals = board + ".reveals";
    return era::cli::cmd_verify(board, reveals, challenge, std::cout, std::cerr);
  }
  if (*tamper_cmd) {
    if (out_path.empty()) out_path = board + ".tampered";
    return era::cli::cmd_tamper(board, fault, out_path, challenge, std::cout, std::cerr);
  }
  if (*bench_cmd) return era::cli::cmd_bench(bench, std::cout, std::cerr);
  return era::cli::cmd_storage(board, std::cout, std::cerr);
}
