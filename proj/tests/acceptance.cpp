// One line per acceptance criterion. Usage: era_acceptance [AC1 AC4 ...]

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "era/cli.hpp"
#include "oracles.hpp"

using namespace era;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

// --- AC1 -------------------------------------------------------------------
Outcome ac1() {
  Outcome out;
  Drbg rng("acceptance/ac1");
  auto key = paillier::keygen(256, paillier::RandomPrimes(rng));
  const auto& pub = key.public_key();
  for (int i = 0; i < 1000; ++i) {
    mpz_class m = rng.uniform_below(key.n());
    auto r = paillier::sample_randomness(pub, rng);
    auto c = paillier::encrypt(pub, paillier::Plaintext{m}, r);
    if (c.value != oracle::paillier_encrypt(key.n(), m, r.r)) return out.fail("encrypt differs from oracle"), out;
    if (paillier::decrypt_with_phi(c, key).m != m) return out.fail("phi decryption"), out;
    if (paillier::decrypt_with_r(c, r, pub).m != m) return out.fail("randomness decryption"), out;
    if (paillier::recover_random(c, key).r != r.r) return out.fail("recover_random"), out;
    mpz_class m2 = rng.uniform_below(key.n());
    auto r2 = paillier::sample_randomness(pub, rng);
    auto sum = paillier::ct_mul(c, paillier::encrypt(pub, paillier::Plaintext{m2}, r2), pub);
    if (paillier::decrypt_with_phi(sum, key).m != mod(m + m2, key.n())) return out.fail("homomorphism"), out;
  }
  auto k35 = paillier::keygen(6, paillier::FixedPrimes(5, 7));
  std::set<mpz_class> seen;
  std::size_t pairs = 0;
  for (int m = 0; m < 35; ++m) {
    for (int r = 1; r < 35; ++r) {
      if (gcd(mpz_class(r), 35) != 1) continue;
      ++pairs;
      seen.insert(paillier::encrypt(k35.public_key(), paillier::Plaintext{m}, paillier::Randomness{r}).value);
    }
  }
  if (seen.size() != pairs) out.fail("binding collision at n=35");
  out.detail = "1000 round trips at 256-bit n, " + std::to_string(pairs) + " distinct (m,r) encryptions at n=35";
  return out;
}

// --- AC2 -------------------------------------------------------------------
Outcome ac2() {
  Outcome out;
  GroupParams gp = group_setup(512, "acceptance/ac2");
  Drbg rng("acceptance/ac2");
  std::size_t transfers = 0;
  for (std::size_t z : {2u, 10u, 100u}) {
    std::vector<mpz_class> ms;
    for (std::size_t i = 0; i < z; ++i) ms.push_back(rng.uniform_below(gp.p - 1) + 1);
    for (std::size_t alpha = 1; alpha <= z; ++alpha) {
      auto q = ot::query(alpha, z, gp, rng);
      auto batch = ot::respond(q.request.y, ms, gp, rng);
      ++transfers;
      if (ot::recover(batch, q.secret, gp) != ms[alpha - 1]) return out.fail("wrong message recovered"), out;
    }
  }
  std::vector<mpz_class> ms;
  for (std::size_t i = 0; i < 10; ++i) ms.push_back(rng.uniform_below(gp.p - 1) + 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t alpha = rng.uniform_u64(10) + 1;
    std::size_t other = (alpha + rng.uniform_u64(9)) % 10 + 1;  // != alpha
    auto q = ot::query(alpha, 10, gp, rng);
    auto batch = ot::respond(q.request.y, ms, gp, rng);
    if (ot::recover(batch.xi[other - 1], q.secret.r, gp) == ms[other - 1]) {
      return out.fail("cross-index recovery matched"), out;
    }
  }
  out.detail = std::to_string(transfers) + " transfers over z in {2,10,100}, 100 cross-index mismatches, 512-bit p";
  return out;
}

// --- AC3 -------------------------------------------------------------------
Outcome ac3() {
  Outcome out;
  constexpr unsigned t = 8;
  Drbg rng("acceptance/ac3");
  auto key = paillier::keygen(64, paillier::RandomPrimes(rng));
  const auto& pub = key.public_key();
  auto ts = rangeproof::gen_test_set(pub, t, rng, 1);

  std::vector<paillier::Ciphertext> c(256);
  for (int x = 0; x < 256; ++x) {
    auto r = paillier::sample_randomness(pub, rng);
    c[x] = paillier::encrypt(pub, paillier::Plaintext{x}, r);
    auto proof = rangeproof::prove_range(x, r, ts, pub);
    if (rangeproof::verify_range(c[x], proof, ts.pub, t, pub) != rangeproof::RangeVerdict::kAccept) {
      return out.fail("completeness fails at x=" + std::to_string(x)), out;
    }
  }

  const mpz_class& n = key.n();
  const mpz_class& n2 = key.n_sq();
  std::vector<mpz_class> entry, entry_inv;
  for (const auto& e : ts.pub.entries) {
    entry.push_back(e.value);
    entry_inv.push_back(*invert(e.value, n2));
  }
  // A witness (S, r*) for D = E(x1 - x2) exists iff prod(S)/D is an n-th
  // power; the only candidate root is recover_random of it.
  auto accepting = [&](const mpz_class& lhs) {
    mpz_class cand = paillier::recover_random(paillier::adopt(pub, lhs), key).r;
    return powm(cand, n, n2) == lhs;
  };
  auto witnesses = [&](const paillier::Ciphertext& d) {
    mpz_class lhs = paillier::ct_inverse(d, pub).value;  // empty subset
    std::size_t found = accepting(lhs) ? 1 : 0;
    unsigned gray = 0;
    for (unsigned i = 1; i < (1u << t); ++i) {
      unsigned next = i ^ (i >> 1);
      unsigned bit = __builtin_ctz(gray ^ next);
      lhs = lhs * ((next >> bit) & 1 ? entry[bit] : entry_inv[bit]) % n2;
      gray = next;
      if (accepting(lhs)) ++found;
    }
    return found;
  };
  std::size_t pairs = 0;
  for (int x1 = 0; x1 < 256; ++x1) {
    for (int x2 = x1 + 1; x2 < 256; ++x2) {
      ++pairs;
      if (witnesses(rangeproof::difference_ciphertext(c[x1], c[x2], pub)) != 0) {
        return out.fail("accepting witness for " + std::to_string(x1) + " >= " + std::to_string(x2)), out;
      }
    }
  }
  // the biconditional's other direction: exactly one witness when x1 >= x2
  for (int k = 0; k < 64; ++k) {
    int x2 = static_cast<int>(rng.uniform_u64(256));
    int x1 = x2 + static_cast<int>(rng.uniform_u64(256 - x2));
    if (witnesses(rangeproof::difference_ciphertext(c[x1], c[x2], pub)) != 1) {
      return out.fail("missing witness for " + std::to_string(x1) + " >= " + std::to_string(x2)), out;
    }
  }
  out.detail = "256 values prove; " + std::to_string(pairs) + " pairs x1<x2 x 256 subsets: no witness";
  return out;
}

// --- AC4 -------------------------------------------------------------------
Outcome ac4() {
  Outcome out;
  std::size_t bidders = 0;
  for (int i = 0; i < 200; ++i) {
    Config cfg;
    cfg.z_min_cents = 1;
    cfg.z_max_cents = 10000;
    cfg.t = 32;
    cfg.key_bits = 512;
    cfg.group_bits = 64;
    cfg.l = i == 0 ? 1000 : 2 + (static_cast<std::size_t>(i) * 7919) % 39;
    cfg.w = 1 + static_cast<std::size_t>(i) % 10;
    cfg.seed = "ac4-" + std::to_string(i);
    cfg.assignment = i % 3 == 0 ? Assignment::kRandom : Assignment::kRoundRobin;
    auto w = auction::run_honest(cfg);
    bidders += cfg.l;
    std::vector<oracle::PlainBid> bids;
    for (const auto& b : w.bidders) bids.push_back({b.slot, b.identity, b.bid});
    auto expected = oracle::second_price(bids);
    if (w.outcome->winner_identity != expected.winner || w.outcome->payment != expected.payment) {
      return out.fail("auction " + std::to_string(i) + " disagrees with the plaintext oracle"), out;
    }
    auto board = bulletin::Board::parse(w.board.serialize());
    auto transcript = auction::OrderingTranscript::parse(w.transcript.serialize(),
                                                         paillier::PublicKey(board.header().auctioneer_n));
    auto v = auction::verify_board(board, transcript);
    if (!v.accepted) return out.fail("auction " + std::to_string(i) + " rejected: " + v.reason), out;
  }
  out.detail = "200 auctions, " + std::to_string(bidders) + " bidders, z=10000, t=32, 512-bit keys";
  return out;
}

// --- AC5 -------------------------------------------------------------------
Outcome ac5() {
  Outcome out;
  fs::path dir = fs::temp_directory_path() / "era-acceptance-ac5";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::size_t cases = 0;
  for (int i = 0; i < 20; ++i) {
    std::string cfg_path = (dir / ("w" + std::to_string(i) + ".cfg")).string();
    std::ofstream(cfg_path) << "z_min_cents=1\nz_max_cents=10000\nt=32\nkey_bits=256\ngroup_bits=64\n"
                            << "l=" << 3 + i % 10 << "\nw=" << 2 + i % 3 << "\nseed=ac5-" << i << "\n";
    std::string board = (dir / ("b" + std::to_string(i) + ".log")).string();
    std::ostringstream sink;
    if (cli::cmd_run(cli::RunOptions{cfg_path, board, {}, std::nullopt}, sink, sink) != 0) {
      return out.fail("run failed: " + sink.str()), out;
    }
    if (cli::cmd_verify(board, board + ".reveals", std::nullopt, sink, sink) != 0) {
      return out.fail("honest board " + std::to_string(i) + " rejected"), out;
    }
    for (auto kind : auction::kAllFaults) {
      std::string bad = board + "." + auction::to_string(kind);
      std::ostringstream report;
      if (cli::cmd_tamper(board, auction::to_string(kind), bad, std::nullopt, report, sink) != 0) {
        return out.fail("tamper failed: " + sink.str()), out;
      }
      ++cases;
      std::ostringstream verdict;
      int code = cli::cmd_verify(bad, bad + ".reveals", std::nullopt, verdict, sink);
      std::string r = report.str();
      auto field = [&](const std::string& name) {
        auto at = r.find(name + "=") + name.size() + 1;
        return r.substr(at, r.find(' ', at) - at);
      };
      if (code != 1) {
        return out.fail(std::string(auction::to_string(kind)) + " on board " + std::to_string(i) +
                        " not rejected"), out;
      }
      if (field("injected") != field("blamed")) {
        return out.fail(std::string(auction::to_string(kind)) + ": blamed " + field("blamed") + ", injected " +
                        field("injected")), out;
      }
    }
  }
  fs::remove_all(dir);
  out.detail = std::to_string(cases) + " tampered boards: all exit 1, blame sets equal injected sets";
  return out;
}

// --- AC6 -------------------------------------------------------------------
Outcome ac6() {
  Outcome out;
  auto table = ope::generate_mapping(ope::build_bid_space(1, 10000, 1), 32, "ac6");
  constexpr int reps = 5;
  // Reps run in the outer loop, alternating direction, so a slow stretch of
  // the host is spread over all points; each point keeps its median rep.
  auto era_medians = [&](const std::vector<std::pair<std::size_t, std::size_t>>& points) {
    std::vector<std::vector<double>> samples(points.size());
    for (int r = 0; r < reps; ++r) {
      for (std::size_t k = 0; k < points.size(); ++k) {
        std::size_t i = r % 2 == 0 ? k : points.size() - 1 - k;
        samples[i].push_back(bench::measure_latency(points[i].first, points[i].second, r, table, "ac6", 2.0).era_ms);
      }
    }
    std::vector<double> med;
    for (auto& v : samples) {
      std::nth_element(v.begin(), v.begin() + reps / 2, v.end());
      med.push_back(v[reps / 2]);
    }
    return med;
  };
  std::vector<double> xs;
  for (std::size_t l : {20000u, 40000u, 60000u, 80000u, 100000u}) xs.push_back(static_cast<double>(l));
  std::vector<std::pair<std::size_t, std::size_t>> by_l;
  for (double l : xs) by_l.emplace_back(static_cast<std::size_t>(l), 100);
  auto ys = era_medians(by_l);
  auto fit = bench::fit_linear(xs, ys);
  if (fit.r2 < 0.95 || fit.slope <= 0) out.fail("era_ms vs l: R^2 " + fmt(fit.r2));

  auto by_w = era_medians({{1000000, 60}, {1000000, 80}, {1000000, 100}});
  if (!(by_w[0] >= by_w[1] && by_w[1] >= by_w[2])) {
    out.fail("era_ms not nonincreasing in w: " + fmt(by_w[0]) + ", " + fmt(by_w[1]) + ", " + fmt(by_w[2]));
  }

  double ratio_sum = 0;
  for (int r = 0; r < reps; ++r) {
    auto s = bench::measure_latency(200000, 100, r, table, "ac6", 2.0);
    ratio_sum += s.benchmark_ms / s.era_ms;
  }
  double ratio = ratio_sum / reps;
  if (ratio < 10) out.fail("benchmark/era ratio " + fmt(ratio));
  if (out.pass) {
    out.detail = "R^2 " + fmt(fit.r2) + " over l, w=60/80/100 -> " + fmt(by_w[0]) + "/" + fmt(by_w[1]) + "/" +
                 fmt(by_w[2]) + " ms at l=1e6, benchmark/era " + fmt(ratio, 3) + " at l=2e5";
  }
  return out;
}

// --- AC7 -------------------------------------------------------------------
Outcome ac7() {
  Outcome out;
  GroupParams gp = group_setup(128, "acceptance/ac7");
  std::vector<double> xs;
  for (std::size_t z = 5000; z <= 10000; z += 500) xs.push_back(static_cast<double>(z));
  // Trials interleaved across z; each z keeps its median. The minimum would
  // favour short trials, which fit inside the host's rare fast phases more often.
  // Sweeps alternate direction so no z sits at a fixed point in time.
  constexpr int trials = 31;
  std::vector<std::vector<double>> samples(xs.size());
  for (int trial = 0; trial < trials; ++trial) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      std::size_t i = trial % 2 == 0 ? k : xs.size() - 1 - k;
      samples[i].push_back(
          bench::mapped_bid_gen_ms(static_cast<std::size_t>(xs[i]), gp, 32, "ac7/" + std::to_string(trial), 1));
    }
  }
  std::vector<double> ys;
  for (auto& v : samples) {
    std::nth_element(v.begin(), v.begin() + trials / 2, v.end());
    ys.push_back(v[trials / 2]);
  }
  auto fit = bench::fit_linear(xs, ys);
  if (fit.r2 < 0.95) out.fail("R^2 " + fmt(fit.r2));
  else out.detail = "R^2 " + fmt(fit.r2) + ", " + fmt(ys.front(), 3) + " ms at z=5000, " + fmt(ys.back(), 3) +
                    " ms at z=10000 (128-bit p)";
  return out;
}

// --- AC8 -------------------------------------------------------------------
Outcome ac8() {
  Outcome out;
  auto base = [] {
    Config c;
    c.z_min_cents = 1;
    c.z_max_cents = 10;
    c.t = 4;
    c.key_bits = 32;
    c.group_bits = 32;
    c.w = 10;
    c.seed = "ac8";
    return c;
  };
  std::vector<double> ls, board_bytes;
  std::set<std::size_t> agent_bytes;
  for (std::size_t l : {1000u, 10000u, 100000u}) {
    Config c = base();
    c.l = l;
    auto w = auction::run_honest(c);
    auto report = bench::storage_report(w);
    ls.push_back(static_cast<double>(l));
    board_bytes.push_back(static_cast<double>(report.board_bytes));
    agent_bytes.insert(report.agent_bytes);
  }
  auto board_fit = bench::fit_linear(ls, board_bytes);
  if (board_fit.r2 < 0.99) out.fail("board bytes vs l: R^2 " + fmt(board_fit.r2));
  if (agent_bytes.size() != 1) out.fail("agent bytes vary with l");

  std::vector<double> zs, table_bytes;
  for (ope::Cents z : {1000, 2000, 3000, 4000, 5000}) {
    Config c = base();
    c.z_max_cents = z;
    c.t = 16;
    c.key_bits = 64;
    c.l = 2;
    auto w = auction::run_honest(c);
    zs.push_back(static_cast<double>(z));
    table_bytes.push_back(static_cast<double>(bench::storage_report(w).agent_bytes));
  }
  auto agent_fit = bench::fit_linear(zs, table_bytes);
  if (agent_fit.r2 < 0.99) out.fail("agent bytes vs z: R^2 " + fmt(agent_fit.r2));
  if (out.pass) {
    out.detail = "board R^2 " + fmt(board_fit.r2, 6) + " over l=1e3..1e5, agent " +
                 std::to_string(*agent_bytes.begin()) + " B for every l, agent vs z R^2 " + fmt(agent_fit.r2, 6);
  }
  return out;
}

// --- AC9 -------------------------------------------------------------------
Outcome ac9() {
  Outcome out;
  std::size_t values = 0;
  for (int i = 0; i < 50; ++i) {
    Config c;
    c.z_min_cents = 1;
    c.z_max_cents = 10000;
    c.t = 32;
    c.key_bits = 128;
    c.group_bits = 64;
    c.l = 5 + static_cast<std::size_t>(i) % 26;
    c.w = 1 + static_cast<std::size_t>(i) % 4;
    c.seed = "ac9-" + std::to_string(i);
    auto w = auction::run_honest(c);
    auto [bids, ids] = auction::privacy_forbidden(w);
    values += bids.size() + ids.size();
    auto hits = auction::privacy_scan(w.board.serialize(), bids, ids);
    if (!hits.empty()) {
      return out.fail("run " + std::to_string(i) + ": plaintext in " + hits[0].field + " at seq " +
                      std::to_string(hits[0].seq)), out;
    }
  }
  out.detail = "50 boards scanned, " + std::to_string(values) + " protected values absent";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    auto start = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << name << " [PRIMARY] " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ("
              << fmt(seconds_since(start), 3) << " s)" << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
