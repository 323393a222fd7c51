#include "meshfab/pagerank.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "meshfab/numfmt.hpp"
#include "meshfab/scheduler.hpp"

namespace meshfab {

Eigen::VectorXd reference_pagerank(const TransitionMatrix& t,
                                   const PageRankParams& p) {
  const Eigen::Index n = t.size();
  const double teleport = (1.0 - p.damping) / static_cast<double>(n);
  Eigen::VectorXd pr = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (std::uint32_t k = 0; k < p.iterations; ++k) {
    Eigen::VectorXd next =
        p.damping * (t.H * pr) + Eigen::VectorXd::Constant(n, teleport);
    if (p.tolerance && (next - pr).lpNorm<1>() <= *p.tolerance) {
      pr = std::move(next);
      break;
    }
    pr = std::move(next);
  }
  return pr;
}

FabricPageRankResult fabric_pagerank(const Graph& g, const PageRankParams& p,
                                     const FabricConfig& cfg) {
  const TransitionMatrix t = build_transition(g);
  const Eigen::Index n = t.size();
  const Eigen::MatrixXf h32 = t.dense32();
  const auto damping = static_cast<float>(p.damping);

  FabricPageRankResult result;
  result.tiled = !fits_untiled(n, n, cfg);

  Eigen::VectorXf pr =
      Eigen::VectorXf::Constant(n, 1.0f / static_cast<float>(n));
  const std::vector<std::uint16_t> sinks = matvec_sink_sites(n, n, cfg);

  for (std::uint32_t k = 0; k < p.iterations; ++k) {
    Fabric fabric(cfg);
    fabric.tracing = false;  // big runs; per-cycle events are not needed here
    Eigen::VectorXf next(n);
    if (result.tiled) {
      auto [plan, sched] = build_tiled_pagerank_iteration(h32, pr, damping, cfg);
      const RunResult run = run_schedule(fabric, sched);
      result.timesteps += run.timesteps;
      next = extract_tiled_result(plan, run);
    } else {
      const InjectionSchedule sched =
          build_pagerank_iteration(h32, pr, damping, cfg);
      const RunResult run = run_schedule(fabric, sched);
      result.timesteps += run.timesteps;
      for (Eigen::Index i = 0; i < n; ++i) {
        next(i) = run.final_values[sinks[static_cast<std::size_t>(i)]];
      }
    }
    ++result.iterations_run;
    if (p.tolerance && (next - pr).lpNorm<1>() <= static_cast<float>(*p.tolerance)) {
      pr = std::move(next);
      break;
    }
    pr = std::move(next);
  }

  result.ranks = std::move(pr);
  result.model_seconds = static_cast<double>(result.timesteps) /
                         static_cast<double>(cfg.clock_hz);
  return result;
}

std::vector<RankEntry> rank_report(const Eigen::VectorXd& ranks,
                                   const std::vector<std::string>& labels,
                                   std::size_t k) {
  const auto n = static_cast<std::size_t>(ranks.size());
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (ranks(a) != ranks(b)) return ranks(a) > ranks(b);
    return a < b;
  });
  k = std::min(k, n);
  std::vector<RankEntry> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint32_t node = order[i];
    out.push_back({static_cast<std::uint32_t>(i + 1), node,
                   node < labels.size() ? labels[node] : std::to_string(node),
                   ranks(node)});
  }
  return out;
}

std::string format_rank_csv(const std::vector<RankEntry>& entries) {
  std::ostringstream out;
  out << kRankCsvHeader << "\n";
  for (const auto& e : entries) {
    out << e.rank << "," << e.node << "," << e.label << ","
        << format_f64(e.score) << "\n";
  }
  return out.str();
}

}  // namespace meshfab
