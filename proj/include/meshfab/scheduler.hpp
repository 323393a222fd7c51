#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "meshfab/schedule.hpp"

namespace meshfab {

// Raised by the untiled builders when the kernel does not fit the fabric;
// callers fall back to the tiled builders.
struct NeedsTilingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An N x M matrix maps untiled when its N rows, M matrix columns and one sink
// column fit the grid. These conditions keep the site budget at N*M + N.
bool fits_untiled(Eigen::Index n_rows, Eigen::Index n_cols,
                  const FabricConfig& cfg);

// Sink sites of the untiled mapping: one per matrix row, in the column just
// right of the matrix block.
std::vector<std::uint16_t> matvec_sink_sites(Eigen::Index n_rows,
                                             Eigen::Index n_cols,
                                             const FabricConfig& cfg);

// Lowers y = A * B onto the fabric in exactly N+3 timesteps: N timesteps of
// matrix load through hopping (last row first), one vertical-bus multiply,
// one horizontal-bus reduce into the per-row sinks, one offload.
InjectionSchedule build_matvec(const Eigen::MatrixXf& A,
                               const Eigen::VectorXf& B,
                               const FabricConfig& cfg);

// Tiling plan for matrices larger than the grid. Tiles are tile_rows x
// tile_cols with tile_rows = rows and tile_cols = cols-1 (one column is
// reserved for sinks); partial sums accumulate across column blocks in
// ascending order through terminal adds at the sinks.
struct TilePlan {
  std::uint32_t tile_rows = 0;
  std::uint32_t tile_cols = 0;
  std::uint32_t row_blocks = 0;
  std::uint32_t col_blocks = 0;
  std::uint16_t sink_col = 0;

  struct Tile {
    std::uint32_t row_block = 0;
    std::uint32_t col_block = 0;
    std::uint64_t base_cycle = 0;
    std::uint32_t rows_eff = 0;
    std::uint32_t cols_eff = 0;
  };
  std::vector<Tile> tiles;  // execution (= accumulation) order

  struct Readout {
    std::uint32_t output_row = 0;
    std::uint64_t offload_cycle = 0;
    std::uint16_t site = 0;
  };
  std::vector<Readout> readout;
};

std::pair<TilePlan, InjectionSchedule> build_tiled_matvec(
    const Eigen::MatrixXf& A, const Eigen::VectorXf& B,
    const FabricConfig& cfg);

// One power-iteration step PR = d*(H*PR_prev) + (1-d)/N in exactly N+6
// timesteps: the N+3 matvec, a scalar multiply by d on the sink column, a
// terminal add of the teleport term, and a final offload.
InjectionSchedule build_pagerank_iteration(const Eigen::MatrixXf& H,
                                           const Eigen::VectorXf& pr_prev,
                                           float damping,
                                           const FabricConfig& cfg);

std::pair<TilePlan, InjectionSchedule> build_tiled_pagerank_iteration(
    const Eigen::MatrixXf& H, const Eigen::VectorXf& pr_prev, float damping,
    const FabricConfig& cfg);

// Collects each output row's value from the offload the plan designated.
Eigen::VectorXf extract_tiled_result(const TilePlan& plan,
                                     const RunResult& run);

}  // namespace meshfab
