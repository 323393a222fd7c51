#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace meshfab {

struct CostParams {
  std::uint64_t sites = 4096;          // hardware units available
  double clock_hz = 2.0e8;

  // Side of the square fabric; sites must be a perfect square.
  std::uint64_t side() const;
};

// Untiled matrix-vector latency in timesteps: N load + multiply + add +
// offload. Independent of the column count.
std::uint64_t matvec_latency(std::uint64_t n_rows);

// n power-iteration steps on an N-node network, untiled: n * (N + 6).
std::uint64_t pagerank_timesteps(std::uint64_t n_nodes, std::uint64_t iterations);

// Runtime of the tiled power iteration on a finite square fabric. The
// fractional model charges (N/s)^2 tiles of s+6 steps each; the integer
// model rounds the tile count up per axis. Both readings are reported; the
// fractional one is the default everywhere.
struct TiledRuntime {
  double fractional_timesteps = 0.0;
  double fractional_seconds = 0.0;
  std::uint64_t ceil_timesteps = 0;
  double ceil_seconds = 0.0;
};

TiledRuntime tiled_runtime(std::uint64_t n_nodes, std::uint64_t iterations,
                           const CostParams& c);

enum class TileModel { Fractional, Ceil };

double tiled_runtime_seconds(std::uint64_t n_nodes, std::uint64_t iterations,
                             const CostParams& c,
                             TileModel model = TileModel::Fractional);

// CSV sweeps, one row per N: N,n,S,f_hz,timesteps,seconds,model
inline constexpr std::string_view kSweepCsvHeader =
    "N,n,S,f_hz,timesteps,seconds,model";

std::string sweep_matvec_csv(std::uint64_t from, std::uint64_t to,
                             std::uint64_t step, bool geometric,
                             const CostParams& c, TileModel model);

std::string sweep_throughput_csv(std::uint64_t from, std::uint64_t to,
                                 std::uint64_t step, bool geometric,
                                 std::uint64_t iterations, const CostParams& c,
                                 TileModel model);

}  // namespace meshfab
