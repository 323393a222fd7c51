// meshfab: assemble and run message schedules on the simulated fabric, rank
// networks with the fabric-backed power iteration, and emit the analytic
// latency/throughput sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "meshfab/fabric.hpp"
#include "meshfab/graph.hpp"
#include "meshfab/isa.hpp"
#include "meshfab/numfmt.hpp"
#include "meshfab/pagerank.hpp"
#include "meshfab/perf.hpp"
#include "meshfab/schedule.hpp"
#include "meshfab/scheduler.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitSim = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw meshfab::ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

// stdout by default, file when -o/--out-file given.
void emit(const std::optional<std::string>& out_file, const std::string& text) {
  if (out_file) {
    write_file(*out_file, text);
  } else {
    std::fwrite(text.data(), 1, text.size(), stdout);
  }
}

meshfab::FabricConfig fabric_from(const std::optional<std::string>& path) {
  meshfab::FabricConfig cfg;
  if (path) cfg = meshfab::load_fabric_config(*path);
  if (const char* env = std::getenv("MESHFAB_MAX_CYCLES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') cfg.max_cycles = v;
  }
  cfg.validate();
  return cfg;
}

using meshfab::format_f32;
using meshfab::format_f64;

struct SweepRange {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  std::uint64_t step = 0;
  bool geometric = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meshfab: programmable mesh fabric simulator and kernel runner"};
  app.require_subcommand(1);

  std::optional<std::string> fabric_path;
  app.add_option("--fabric", fabric_path, "fabric config file (key=value)")
      ->expected(1);
  std::string out_dir;
  app.add_option("--out", out_dir, "output directory for generated files");
  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "seed for synthetic inputs");
  double damping = 0.85;
  app.add_option("--damping", damping, "damping factor d");
  std::uint32_t iters = 100;
  app.add_option("--iters", iters, "power-iteration count n");
  std::string model_flag = "fractional";
  app.add_option("--model", model_flag, "tile model: fractional or ceil")
      ->check(CLI::IsMember({"fractional", "ceil"}));
  bool trace = false;
  app.add_flag("--trace", trace, "write the full message trace");

  // asm / disasm ------------------------------------------------------------
  auto* cmd_asm = app.add_subcommand("asm", "assemble message lines to hex words");
  cmd_asm->fallthrough();
  std::string asm_in;
  std::optional<std::string> asm_out;
  cmd_asm->add_option("input", asm_in, "assembly file")->required();
  cmd_asm->add_option("-o,--out-file", asm_out, "output file (default stdout)");

  auto* cmd_disasm = app.add_subcommand("disasm", "disassemble hex words");
  cmd_disasm->fallthrough();
  std::string dis_in;
  std::optional<std::string> dis_out;
  cmd_disasm->add_option("input", dis_in, "hex dump file")->required();
  cmd_disasm->add_option("-o,--out-file", dis_out, "output file (default stdout)");

  // run ----------------------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "execute a schedule on the fabric");
  cmd_run->fallthrough();
  std::string run_in;
  cmd_run->add_option("schedule", run_in, "schedule file")->required();

  // pagerank ------------------------------------------------------------------
  auto* cmd_pr = app.add_subcommand("pagerank", "rank a network on the fabric");
  cmd_pr->fallthrough();
  std::optional<std::string> pr_edges;
  cmd_pr->add_option("edges", pr_edges, "tab-separated edge list");
  std::optional<std::uint32_t> pr_synth;
  cmd_pr->add_option("--synthetic", pr_synth, "generate an n-node network instead");
  std::uint32_t pr_epn = 3;
  cmd_pr->add_option("--edges-per-node", pr_epn, "attachment degree for --synthetic");
  bool pr_directed = false;
  cmd_pr->add_flag("--directed", pr_directed, "treat edges as directed");
  bool pr_model_only = false;
  cmd_pr->add_flag("--model-only", pr_model_only,
                   "skip simulation; report the analytic runtime");
  std::optional<std::uint32_t> pr_nodes;
  cmd_pr->add_option("--nodes", pr_nodes, "network size for --model-only");
  std::uint64_t pr_sites = 4096;
  cmd_pr->add_option("--sites", pr_sites, "hardware units for the analytic model");
  std::size_t pr_topk = 10;
  cmd_pr->add_option("--topk", pr_topk, "rows in the rank table");
  bool pr_oracle = false;
  cmd_pr->add_flag("--oracle", pr_oracle,
                   "rank with the 64-bit reference instead of the fabric");

  // sweep ----------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "emit latency/throughput CSV");
  cmd_sweep->fallthrough();
  std::string sweep_kind;
  cmd_sweep->add_option("kind", sweep_kind, "matvec-latency | pagerank-throughput")
      ->required()
      ->check(CLI::IsMember({"matvec-latency", "pagerank-throughput"}));
  std::optional<std::uint64_t> sw_from, sw_to, sw_step;
  cmd_sweep->add_option("--from", sw_from, "first N");
  cmd_sweep->add_option("--to", sw_to, "last N");
  cmd_sweep->add_option("--step", sw_step, "additive step (0 = double)");
  std::uint64_t sw_sites = 4096;
  cmd_sweep->add_option("--sites", sw_sites, "hardware units");
  double sw_clock = 2.0e8;
  cmd_sweep->add_option("--clock", sw_clock, "clock frequency in Hz");
  std::optional<std::string> sweep_out;
  cmd_sweep->add_option("-o,--out-file", sweep_out, "output file (default stdout)");

  // gen -------------------------------------------------------------------------
  auto* cmd_gen = app.add_subcommand("gen", "write a synthetic network edge list");
  cmd_gen->fallthrough();
  std::uint32_t gen_nodes = 0;
  cmd_gen->add_option("--nodes", gen_nodes, "node count")->required();
  std::uint32_t gen_epn = 3;
  cmd_gen->add_option("--edges-per-node", gen_epn, "attachment degree");
  std::optional<std::string> gen_out;
  cmd_gen->add_option("-o,--out-file", gen_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const meshfab::TileModel model = model_flag == "ceil"
                                       ? meshfab::TileModel::Ceil
                                       : meshfab::TileModel::Fractional;

  try {
    if (*cmd_asm) {
      std::ostringstream out;
      const std::string text = read_file(asm_in);
      std::size_t line_no = 0, pos = 0;
      while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string line = text.substr(
            pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          out << meshfab::format_word_hex(
                     meshfab::encode(meshfab::parse_message(line)))
              << "\n";
        } catch (const std::runtime_error& e) {
          throw meshfab::ParseError("line " + std::to_string(line_no) + ": " +
                                    e.what());
        }
      }
      emit(asm_out, out.str());
      return 0;
    }

    if (*cmd_disasm) {
      std::ostringstream out;
      const std::string text = read_file(dis_in);
      std::size_t line_no = 0, pos = 0;
      while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string line = text.substr(
            pos, eol == std::string::npos ? std::string::npos : eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          out << meshfab::format_message(
                     meshfab::decode(meshfab::parse_word_hex(line)))
              << "\n";
        } catch (const std::runtime_error& e) {
          throw meshfab::ParseError("line " + std::to_string(line_no) + ": " +
                                    e.what());
        }
      }
      emit(dis_out, out.str());
      return 0;
    }

    if (*cmd_run) {
      const meshfab::FabricConfig cfg = fabric_from(fabric_path);
      const meshfab::InjectionSchedule sched =
          meshfab::parse_schedule(read_file(run_in));
      meshfab::Fabric fabric(cfg);
      fabric.tracing = true;
      const meshfab::RunResult result = meshfab::run_schedule(fabric, sched);

      std::ostringstream out;
      out << "timesteps=" << result.timesteps << "\n";
      if (sched.expected_timesteps > 0) {
        out << "expected_timesteps=" << sched.expected_timesteps << "\n";
      }
      for (std::size_t a = 0; a < result.final_values.size(); ++a) {
        if (result.final_values[a] != 0.0f) {
          out << "site=" << a << " value="
              << format_f32(result.final_values[a]) << "\n";
        }
      }
      std::fputs(out.str().c_str(), stdout);

      if (trace || !out_dir.empty()) {
        const std::filesystem::path dir =
            out_dir.empty() ? std::filesystem::path(".")
                            : std::filesystem::path(out_dir);
        std::filesystem::create_directories(dir);
        if (trace) {
          std::ostringstream txt, csv;
          csv << meshfab::kTraceCsvHeader << "\n";
          for (const auto& e : result.trace) {
            txt << meshfab::format_trace_line(e) << "\n";
            csv << meshfab::format_trace_csv_row(e) << "\n";
          }
          write_file(dir / "trace.txt", txt.str());
          write_file(dir / "trace.csv", csv.str());
        }
      }
      return 0;
    }

    if (*cmd_pr) {
      if (pr_model_only) {
        std::uint32_t n = 0;
        if (pr_nodes) {
          n = *pr_nodes;
        } else if (pr_synth) {
          n = *pr_synth;
        } else if (pr_edges) {
          n = static_cast<std::uint32_t>(
              meshfab::load_graph(read_file(*pr_edges), pr_directed)
                  .node_count());
        } else {
          std::fputs("pagerank --model-only needs --nodes, --synthetic, or an "
                     "edge list\n", stderr);
          return kExitUsage;
        }
        const meshfab::CostParams cost{pr_sites, 2.0e8};
        const meshfab::TiledRuntime r = meshfab::tiled_runtime(n, iters, cost);
        std::ostringstream out;
        out << "N=" << n << " n=" << iters << " S=" << cost.sites
            << " f_hz=" << format_f64(cost.clock_hz) << "\n";
        out << "fractional_seconds=" << format_f64(r.fractional_seconds)
            << " fractional_ms=" << format_f64(r.fractional_seconds * 1e3) << "\n";
        out << "ceil_seconds=" << format_f64(r.ceil_seconds)
            << " ceil_ms=" << format_f64(r.ceil_seconds * 1e3) << "\n";
        out << "selected_ms="
            << format_f64(1e3 * (model == meshfab::TileModel::Fractional
                                     ? r.fractional_seconds
                                     : r.ceil_seconds))
            << " model=" << model_flag << "\n";
        std::fputs(out.str().c_str(), stdout);
        return 0;
      }

      meshfab::Graph graph;
      if (pr_synth) {
        graph = meshfab::generate_network(*pr_synth, pr_epn, seed);
      } else if (pr_edges) {
        graph = meshfab::load_graph(read_file(*pr_edges), pr_directed);
      } else {
        std::fputs("pagerank needs an edge list or --synthetic <n>\n", stderr);
        return kExitUsage;
      }

      const meshfab::FabricConfig cfg = fabric_from(fabric_path);
      meshfab::PageRankParams params;
      params.damping = damping;
      params.iterations = iters;

      Eigen::VectorXd scores;
      std::uint64_t timesteps = 0;
      double model_seconds = 0.0;
      if (pr_oracle) {
        scores = meshfab::reference_pagerank(meshfab::build_transition(graph),
                                             params);
      } else {
        const meshfab::FabricPageRankResult result =
            meshfab::fabric_pagerank(graph, params, cfg);
        scores = result.ranks.cast<double>();
        timesteps = result.timesteps;
        model_seconds = result.model_seconds;
      }

      const auto table = meshfab::rank_report(
          scores, graph.labels, pr_topk == 0 ? graph.node_count() : pr_topk);
      const std::string csv = meshfab::format_rank_csv(table);

      std::ostringstream summary;
      summary << "N,n,d,timesteps,model_seconds\n";
      summary << graph.node_count() << "," << iters << ","
              << format_f64(damping) << "," << timesteps << ","
              << format_f64(model_seconds) << "\n";
      std::fputs(summary.str().c_str(), stdout);

      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "ranks.csv", csv);
        write_file(std::filesystem::path(out_dir) / "summary.csv",
                   summary.str());
      } else {
        std::fputs(csv.c_str(), stdout);
      }
      return 0;
    }

    if (*cmd_sweep) {
      const meshfab::CostParams cost{sw_sites, sw_clock};
      std::string csv;
      if (sweep_kind == "matvec-latency") {
        const SweepRange r{sw_from.value_or(256), sw_to.value_or(8192),
                           sw_step.value_or(0), sw_step.value_or(0) == 0};
        csv = meshfab::sweep_matvec_csv(r.from, r.to, r.step, r.geometric, cost,
                                        model);
      } else {
        const SweepRange r{sw_from.value_or(1000), sw_to.value_or(5000),
                           sw_step.value_or(1000), false};
        csv = meshfab::sweep_throughput_csv(r.from, r.to, r.step, r.geometric,
                                            iters, cost, model);
      }
      if (!sweep_out && !out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "sweep.csv", csv);
      } else {
        emit(sweep_out, csv);
      }
      return 0;
    }

    if (*cmd_gen) {
      const meshfab::Graph g =
          meshfab::generate_network(gen_nodes, gen_epn, seed);
      emit(gen_out, meshfab::format_edge_list(g));
      return 0;
    }
  } catch (const meshfab::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const meshfab::DecodeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const meshfab::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitParse;
  } catch (const meshfab::SimError& e) {
    std::fprintf(stderr, "simulation error: %s\n", e.what());
    return kExitSim;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}
