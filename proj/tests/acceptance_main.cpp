// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion carries its timing budget.

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "meshfab/fabric.hpp"
#include "meshfab/graph.hpp"
#include "meshfab/isa.hpp"
#include "meshfab/pagerank.hpp"
#include "meshfab/perf.hpp"
#include "meshfab/schedule.hpp"
#include "meshfab/scheduler.hpp"
#include "oracles.hpp"

using namespace meshfab;

namespace {

struct Outcome {
  int id;
  std::string name;
  bool pass;
  double seconds;
  std::string detail;
};

std::vector<Outcome> g_results;

class Checker {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ++failures_;
      if (detail_.empty()) detail_ = what;
    }
  }
  bool ok() const { return failures_ == 0; }
  std::string detail() const { return detail_; }

 private:
  int failures_ = 0;
  std::string detail_;
};

template <typename Fn>
void criterion(int id, const std::string& name, double budget_s, Fn&& body) {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  c.expect(dt < budget_s, "exceeded the time budget");
  g_results.push_back({id, name, c.ok(), dt, c.detail()});
}

FabricConfig grid(std::uint16_t rows, std::uint16_t cols) {
  FabricConfig cfg;
  cfg.rows = rows;
  cfg.cols = cols;
  return cfg;
}

Eigen::MatrixXf random_matrix(Eigen::Index n, Eigen::Index m,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXf a(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) {
      a(r, c) = static_cast<float>(rng() % 4000) / 256.0f - 7.0f;
    }
  }
  return a;
}

Eigen::VectorXf random_vector(Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x51ed2701u);
  Eigen::VectorXf b(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    b(c) = static_cast<float>(rng() % 4000) / 256.0f - 7.0f;
  }
  return b;
}

const char* kChainSchedule =
    ".expect 5\n"
    "@0 top=0 PROG dest=0 val=1.1 next=A_ADD ndest=3\n"
    "@0 top=1 PROG dest=1 val=1.2 next=A_ADD ndest=3\n"
    "@0 top=2 PROG dest=2 val=1.3 next=UPDATE ndest=3\n"
    "@1 top=0 A_MULS dest=0 val=1 next=PROG ndest=0\n"
    "@1 top=1 A_MULS dest=1 val=2 next=PROG ndest=0\n"
    "@1 top=2 A_MULS dest=2 val=3 next=PROG ndest=0\n";

// ---------------------------------------------------------------- criterion 1
void chain_replay(Checker& c) {
  Fabric fabric(grid(1, 4));
  const RunResult run = run_schedule(fabric, parse_schedule(kChainSchedule));

  const float stored[3] = {1.1f, 1.2f, 1.3f};
  const float incoming[3] = {1.0f, 2.0f, 3.0f};
  const oracle::ChainResult expect = oracle::stream_chain(stored, incoming);
  const double printed[3] = {1.1, 2.4, 3.9};

  std::vector<float> emitted(3, 0.0f);
  for (const auto& e : run.trace) {
    if (e.kind == EventKind::Emit && e.site < 3) emitted[e.site] = e.value;
  }
  for (int i = 0; i < 3; ++i) {
    c.expect(emitted[i] == expect.products[i],
             "streamed product differs from the scalar oracle at site " +
                 std::to_string(i));
    c.expect(std::abs(static_cast<double>(emitted[i]) - printed[i]) <= 1e-6,
             "streamed product is off the documented value at site " +
                 std::to_string(i));
    c.expect(run.final_values[static_cast<std::size_t>(i)] == stored[i],
             "streaming multiply must not change the source register");
  }
  c.expect(run.final_values[3] == expect.final_value,
           "accumulated value differs from the scalar oracle");
  c.expect(std::abs(static_cast<double>(run.final_values[3]) - 7.4) <= 1e-6,
           "site 3 must settle at 7.4 (sum of 1.1, 2.4, 3.9)");
  c.expect(run.timesteps == 5, "chain replay takes five cycles");
}

// ---------------------------------------------------------------- criterion 2
void matvec_latency_law(Checker& c) {
  for (const Eigen::Index n : {2, 4, 8, 16, 32, 64}) {
    for (Eigen::Index m = 2; m <= 8; ++m) {
      const FabricConfig cfg =
          grid(static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(m + 1));
      const Eigen::MatrixXf a =
          random_matrix(n, m, static_cast<std::uint64_t>(n * 100 + m));
      const Eigen::VectorXf b =
          random_vector(m, static_cast<std::uint64_t>(n * 200 + m));
      Fabric fabric(cfg);
      fabric.tracing = false;
      const RunResult run = run_schedule(fabric, build_matvec(a, b, cfg));
      c.expect(run.timesteps == static_cast<std::uint64_t>(n) + 3,
               "simulated latency must be N+3 for N=" + std::to_string(n) +
                   " M=" + std::to_string(m));
    }
  }
  for (std::uint64_t n = 256; n <= 8192; n *= 2) {
    c.expect(matvec_latency(n) == n + 3, "analytic latency must be N+3");
  }
}

// ---------------------------------------------------------------- criterion 3
void site_budget(Checker& c) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 7);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 7);
    const FabricConfig cfg = grid(10, 10);
    const Eigen::MatrixXf a = random_matrix(n, m, rng());
    const Eigen::VectorXf b = random_vector(m, rng());
    Fabric fabric(cfg);
    const RunResult run = run_schedule(fabric, build_matvec(a, b, cfg));
    std::set<std::uint16_t> written;
    for (const auto& e : run.trace) {
      if (e.kind == EventKind::ConsumeProg || e.kind == EventKind::Execute ||
          e.kind == EventKind::BusBroadcast || e.kind == EventKind::BusReduce) {
        written.insert(e.site);
      }
    }
    c.expect(written.size() == static_cast<std::size_t>(n * m + n),
             "schedule must write exactly N*M+N sites for N=" +
                 std::to_string(n) + " M=" + std::to_string(m));
  }
}

// ---------------------------------------------------------------- criterion 4
void pagerank_iteration_law(Checker& c) {
  for (const std::uint32_t iters : {1u, 3u, 10u}) {
    for (const Eigen::Index n : {4, 8, 16}) {
      const Graph g =
          generate_network(static_cast<std::uint32_t>(n), 2,
                           static_cast<std::uint64_t>(n) * 31 + iters);
      const FabricConfig cfg = grid(static_cast<std::uint16_t>(n),
                                    static_cast<std::uint16_t>(n + 1));
      const FabricPageRankResult r =
          fabric_pagerank(g, {0.85, iters, {}}, cfg);
      c.expect(r.timesteps ==
                   pagerank_timesteps(static_cast<std::uint64_t>(n), iters),
               "n iterations must cost n*(N+6) timesteps for N=" +
                   std::to_string(n) + " n=" + std::to_string(iters));
    }
  }
}

// ---------------------------------------------------------------- criterion 5
void headline_throughput(Checker& c) {
  const CostParams cost{4096, 2.0e8};
  const TiledRuntime r = tiled_runtime(5000, 100, cost);
  const double ms = r.fractional_seconds * 1e3;
  c.expect(ms >= 213.0 && ms <= 214.0,
           "fractional tile model must land in [213.0, 214.0] ms, got " +
               std::to_string(ms));
  // the alternative integer reading is reported alongside, never asserted
  // into the band
  std::printf("       criterion 5 info: fractional=%.4f ms, ceil=%.4f ms\n", ms,
              r.ceil_seconds * 1e3);
  c.expect(r.ceil_seconds > r.fractional_seconds,
           "integer tiling can only add work");
}

// ---------------------------------------------------------------- criterion 6
void rank_equivalence(Checker& c) {
  // 22 seeded networks, the last two sized to force tiling on a 64x64 grid
  const std::array<std::pair<std::uint32_t, std::uint64_t>, 22> cases = {{
      {4, 1},   {6, 2},   {8, 3},   {10, 4},  {12, 5},  {16, 6},
      {20, 7},  {24, 8},  {28, 9},  {32, 10}, {36, 11}, {40, 12},
      {44, 13}, {48, 14}, {52, 15}, {56, 16}, {60, 17}, {63, 18},
      {63, 19}, {5, 20},  {64, 101}, {64, 202},
  }};
  const std::uint32_t iters = 20;
  for (const auto& [n, seed] : cases) {
    const Graph g = generate_network(n, 2, seed);
    const FabricConfig cfg = n >= 64
                                 ? grid(64, 64)
                                 : grid(static_cast<std::uint16_t>(n),
                                        static_cast<std::uint16_t>(n + 1));
    const FabricPageRankResult fab = fabric_pagerank(g, {0.85, iters, {}}, cfg);
    const std::vector<double> ref =
        oracle::pagerank_dense(n, g.edges, g.directed, 0.85, iters);

    double linf = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      linf = std::max(linf, std::abs(static_cast<double>(fab.ranks(i)) -
                                     ref[i]));
    }
    c.expect(linf <= 1e-4, "L-infinity gap " + std::to_string(linf) +
                               " exceeds 1e-4 for N=" + std::to_string(n) +
                               " seed=" + std::to_string(seed));

    std::vector<double> fab64(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      fab64[i] = static_cast<double>(fab.ranks(i));
    }
    const auto top_ref = oracle::top_indices(ref, 5);
    const auto top_fab = oracle::top_indices(fab64, 5);

    // Exact order on distinct scores. Automorphic nodes tie in exact
    // arithmetic (the 64-bit scores differ only in summation noise), so
    // within an oracle tie group any arrangement counts as matching.
    const auto order_all = oracle::top_indices(ref, n);
    std::map<std::uint32_t, int> group;
    int gid = 0;
    for (std::size_t i = 0; i < order_all.size(); ++i) {
      if (i > 0 &&
          std::abs(ref[order_all[i]] - ref[order_all[i - 1]]) > 1e-9) {
        ++gid;
      }
      group[order_all[i]] = gid;
    }
    bool order_ok = top_ref.size() == top_fab.size();
    for (std::size_t i = 0; order_ok && i < top_ref.size(); ++i) {
      order_ok = group.at(top_ref[i]) == group.at(top_fab[i]);
    }
    c.expect(order_ok, "top-5 rank order must match for N=" +
                           std::to_string(n) + " seed=" + std::to_string(seed));
  }
}

// ---------------------------------------------------------------- criterion 7
void codec_soundness(Checker& c) {
  std::mt19937_64 rng(777);
  for (int i = 0; i < 10000; ++i) {
    MessageWord m;
    m.opcode = static_cast<Opcode>(rng() % kOpcodeCount);
    m.destination = static_cast<std::uint16_t>(rng() % 4096);
    m.value = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    m.next_opcode = static_cast<Opcode>(rng() % kOpcodeCount);
    m.next_destination = static_cast<std::uint16_t>(rng() % 4096);
    const MessageWord back = decode(encode(m));
    const bool same =
        back.opcode == m.opcode && back.destination == m.destination &&
        std::bit_cast<std::uint32_t>(back.value) ==
            std::bit_cast<std::uint32_t>(m.value) &&
        back.next_opcode == m.next_opcode &&
        back.next_destination == m.next_destination;
    c.expect(same, "round-trip mismatch");
    c.expect(encode(m) == oracle::pack_word(
                              static_cast<std::uint8_t>(m.opcode), m.destination,
                              m.value, static_cast<std::uint8_t>(m.next_opcode),
                              m.next_destination),
             "encoder disagrees with the byte-level packer");
  }
  for (std::uint64_t code = 10; code < 16; ++code) {
    bool threw = false;
    try {
      decode(code);
    } catch (const DecodeError&) {
      threw = true;
    }
    c.expect(threw, "code " + std::to_string(code) + " must be rejected");
    threw = false;
    try {
      decode(code << 48);
    } catch (const DecodeError&) {
      threw = true;
    }
    c.expect(threw, "next-op code " + std::to_string(code) + " must be rejected");
  }
}

// ---------------------------------------------------------------- criterion 8
void routing_totality(Checker& c) {
  const FabricConfig cfg = grid(4, 4);
  const int bound = (cfg.rows - 1) + (cfg.cols - 1);
  for (std::uint16_t src = 0; src < 16; ++src) {
    for (std::uint16_t dst = 0; dst < 16; ++dst) {
      Fabric fabric(cfg);
      fabric.seed_message(src, true,
                          {Opcode::Update, dst, 2.5f, Opcode::Prog, 0});
      int cycles = 0;
      while (!fabric.quiescent() && cycles <= bound + 2) {
        fabric.step();
        ++cycles;
      }
      c.expect(fabric.quiescent() && cycles <= bound + 1,
               "delivery exceeded the hop bound for src=" +
                   std::to_string(src) + " dst=" + std::to_string(dst));
      c.expect(fabric.site(dst).stored == 2.5f, "message did not arrive");
      c.expect(fabric.consumed_count() == 1,
               "message must be consumed exactly once");
      c.expect(fabric.in_flight() == 0, "nothing may stay in flight");

      // one departure per (site, link, cycle), read off the trace
      std::set<std::tuple<std::uint64_t, std::uint16_t, int>> departures;
      bool clean = true;
      for (const auto& e : fabric.trace()) {
        if (e.kind == EventKind::RouteRight || e.kind == EventKind::RouteDown) {
          clean = departures
                      .insert({e.cycle, e.site,
                               e.kind == EventKind::RouteRight ? 0 : 1})
                      .second &&
                  clean;
        }
      }
      c.expect(clean, "two departures shared a link in one cycle");
    }
  }
}

// ---------------------------------------------------------------- criterion 9
std::string artifact_bundle() {
  std::ostringstream bundle;

  {  // chain replay trace
    Fabric fabric(grid(1, 4));
    const RunResult run = run_schedule(fabric, parse_schedule(kChainSchedule));
    for (const auto& e : run.trace) bundle << format_trace_line(e) << "\n";
    bundle << format_trace_csv_row(run.trace.back()) << "\n";
  }
  {  // a matvec schedule, its serialization and its trace
    const FabricConfig cfg = grid(4, 4);
    const Eigen::MatrixXf a = random_matrix(4, 3, 99);
    const Eigen::VectorXf b = random_vector(3, 99);
    const InjectionSchedule sched = build_matvec(a, b, cfg);
    bundle << serialize_schedule(sched);
    Fabric fabric(cfg);
    const RunResult run = run_schedule(fabric, sched);
    for (const auto& e : run.trace) bundle << format_trace_csv_row(e) << "\n";
  }
  {  // ranks
    const Graph g = generate_network(16, 2, 7);
    const FabricPageRankResult r = fabric_pagerank(g, {0.85, 10, {}}, grid(16, 17));
    bundle << format_rank_csv(
        rank_report(r.ranks.cast<double>(), g.labels, 16));
    bundle << r.timesteps << "\n";
  }
  {  // sweeps
    const CostParams cost{4096, 2.0e8};
    bundle << sweep_matvec_csv(256, 8192, 0, true, cost, TileModel::Fractional);
    bundle << sweep_throughput_csv(1000, 5000, 1000, false, 100, cost,
                                   TileModel::Fractional);
  }
  return bundle.str();
}

#ifdef MESHFAB_BIN
std::string run_cli(const std::string& args) {
  const std::string cmd = std::string(MESHFAB_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return "<popen failed>";
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  pclose(pipe);
  return out;
}
#endif

void determinism(Checker& c) {
  c.expect(artifact_bundle() == artifact_bundle(),
           "in-process artifact bundle differs between runs");

#ifdef MESHFAB_BIN
  const auto tmp = std::filesystem::temp_directory_path() / "meshfab_accept";
  std::filesystem::create_directories(tmp);
  const auto sched_path = tmp / "chain.asm";
  {
    std::ofstream out(sched_path);
    out << kChainSchedule;
  }
  const auto cfg_path = tmp / "fabric.cfg";
  {
    std::ofstream out(cfg_path);
    out << "rows=1\ncols=4\n";
  }
  const std::string run_args =
      "run " + sched_path.string() + " --fabric " + cfg_path.string();
  const std::string first = run_cli(run_args);
  const std::string second = run_cli(run_args);
  c.expect(!first.empty() && first == second,
           "CLI run output differs between invocations");
  c.expect(first.find("site=3 value=7.4") != std::string::npos,
           "CLI run must report the accumulated 7.4 at site 3");

  const std::string sweep_args = "sweep pagerank-throughput --iters 100";
  const std::string s1 = run_cli(sweep_args);
  const std::string s2 = run_cli(sweep_args);
  c.expect(!s1.empty() && s1 == s2, "CLI sweep output differs");

  const auto cfg16 = tmp / "fabric16.cfg";
  {
    std::ofstream out(cfg16);
    out << "rows=16\ncols=17\n";
  }
  const std::string pr =
      run_cli("pagerank --synthetic 16 --iters 5 --seed 7 --fabric " +
              cfg16.string());
  const std::string pr2 =
      run_cli("pagerank --synthetic 16 --iters 5 --seed 7 --fabric " +
              cfg16.string());
  c.expect(!pr.empty() && pr == pr2, "CLI pagerank output differs");
#endif
}

}  // namespace

int main() {
  criterion(1, "stream-chain replay", 1.0, chain_replay);
  criterion(2, "matvec latency law", 30.0, matvec_latency_law);
  criterion(3, "matvec site budget", 30.0, site_budget);
  criterion(4, "pagerank iteration law", 30.0, pagerank_iteration_law);
  criterion(5, "headline throughput reconstruction", 5.0, headline_throughput);
  criterion(6, "fabric/oracle rank equivalence", 120.0, rank_equivalence);
  criterion(7, "codec soundness", 5.0, codec_soundness);
  criterion(8, "routing totality", 10.0, routing_totality);
  criterion(9, "byte-identical reruns", 60.0, determinism);

  bool all = true;
  for (const auto& r : g_results) {
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", r.pass ? "PASS" : "FAIL",
                r.id, r.name.c_str(), r.seconds,
                r.pass || r.detail.empty() ? "" : " - ",
                r.pass || r.detail.empty() ? "" : r.detail.c_str());
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
