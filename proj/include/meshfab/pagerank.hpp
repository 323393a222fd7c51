#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "meshfab/fabric.hpp"
#include "meshfab/graph.hpp"
#include "meshfab/transition.hpp"

namespace meshfab {

struct PageRankParams {
  double damping = 0.85;
  std::uint32_t iterations = 100;
  // L1 early stop; disabled by default so timestep counts stay comparable to
  // the fixed-iteration cost law.
  std::optional<double> tolerance;
};

// 64-bit power iteration PR_k = d*H*PR_{k-1} + (1-d)/N, PR_0 uniform.
Eigen::VectorXd reference_pagerank(const TransitionMatrix& t,
                                   const PageRankParams& p);

struct FabricPageRankResult {
  Eigen::VectorXf ranks;
  std::uint64_t timesteps = 0;
  double model_seconds = 0.0;
  std::uint32_t iterations_run = 0;
  bool tiled = false;
};

// Runs the power iteration on the simulated fabric, one rebuilt schedule per
// iteration, tiling when the matrix does not fit. Ranks come back in 32-bit
// fabric arithmetic.
FabricPageRankResult fabric_pagerank(const Graph& g, const PageRankParams& p,
                                     const FabricConfig& cfg);

struct RankEntry {
  std::uint32_t rank = 0;  // 1-based position
  std::uint32_t node = 0;
  std::string label;
  double score = 0.0;
};

// Top-k table, descending score, ties broken by ascending node index.
std::vector<RankEntry> rank_report(const Eigen::VectorXd& ranks,
                                   const std::vector<std::string>& labels,
                                   std::size_t k);

std::string format_rank_csv(const std::vector<RankEntry>& entries);
inline constexpr std::string_view kRankCsvHeader = "rank,node,label,score";

}  // namespace meshfab
