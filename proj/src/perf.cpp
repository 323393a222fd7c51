#include "meshfab/perf.hpp"

#include "meshfab/numfmt.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace meshfab {

std::uint64_t CostParams::side() const {
  if (sites < 1) throw std::invalid_argument("site count must be >= 1");
  const auto s = static_cast<std::uint64_t>(std::llround(std::sqrt(
      static_cast<double>(sites))));
  if (s * s != sites) {
    throw std::invalid_argument("site count " + std::to_string(sites) +
                                " is not a perfect square");
  }
  return s;
}

std::uint64_t matvec_latency(std::uint64_t n_rows) {
  if (n_rows < 1) throw std::invalid_argument("matrix needs at least one row");
  return n_rows + 3;
}

std::uint64_t pagerank_timesteps(std::uint64_t n_nodes,
                                 std::uint64_t iterations) {
  if (n_nodes < 1) throw std::invalid_argument("network needs at least one node");
  return iterations * (n_nodes + 6);
}

TiledRuntime tiled_runtime(std::uint64_t n_nodes, std::uint64_t iterations,
                           const CostParams& c) {
  if (n_nodes < 1) throw std::invalid_argument("network needs at least one node");
  if (c.clock_hz <= 0.0) throw std::invalid_argument("clock must be positive");
  const std::uint64_t s = c.side();
  const double ratio = static_cast<double>(n_nodes) / static_cast<double>(s);
  const double per_tile = static_cast<double>(s + 6);
  const std::uint64_t blocks = (n_nodes + s - 1) / s;

  TiledRuntime r;
  r.fractional_timesteps =
      static_cast<double>(iterations) * ratio * ratio * per_tile;
  r.fractional_seconds = r.fractional_timesteps / c.clock_hz;
  r.ceil_timesteps = iterations * blocks * blocks * (s + 6);
  r.ceil_seconds = static_cast<double>(r.ceil_timesteps) / c.clock_hz;
  return r;
}

double tiled_runtime_seconds(std::uint64_t n_nodes, std::uint64_t iterations,
                             const CostParams& c, TileModel model) {
  const TiledRuntime r = tiled_runtime(n_nodes, iterations, c);
  return model == TileModel::Fractional ? r.fractional_seconds : r.ceil_seconds;
}

namespace {

const char* model_name(TileModel m) {
  return m == TileModel::Fractional ? "fractional" : "ceil";
}

std::vector<std::uint64_t> sweep_points(std::uint64_t from, std::uint64_t to,
                                        std::uint64_t step, bool geometric) {
  std::vector<std::uint64_t> pts;
  if (from < 1) return pts;
  for (std::uint64_t n = from; n <= to;) {
    pts.push_back(n);
    if (geometric) {
      if (n > to / 2) break;
      n *= 2;
    } else {
      if (step < 1) break;
      n += step;
    }
  }
  return pts;
}

void append_row(std::ostringstream& out, std::uint64_t n, std::uint64_t iters,
                const CostParams& c, double timesteps, double seconds,
                TileModel model) {
  out << n << "," << iters << "," << c.sites << "," << format_f64(c.clock_hz)
      << "," << format_f64(timesteps) << "," << format_f64(seconds) << ","
      << model_name(model) << "\n";
}

}  // namespace

std::string sweep_matvec_csv(std::uint64_t from, std::uint64_t to,
                             std::uint64_t step, bool geometric,
                             const CostParams& c, TileModel model) {
  std::ostringstream out;
  out << kSweepCsvHeader << "\n";
  for (const auto n : sweep_points(from, to, step, geometric)) {
    const auto ts = matvec_latency(n);
    append_row(out, n, 1, c, static_cast<double>(ts),
               static_cast<double>(ts) / c.clock_hz, model);
  }
  return out.str();
}

std::string sweep_throughput_csv(std::uint64_t from, std::uint64_t to,
                                 std::uint64_t step, bool geometric,
                                 std::uint64_t iterations, const CostParams& c,
                                 TileModel model) {
  std::ostringstream out;
  out << kSweepCsvHeader << "\n";
  for (const auto n : sweep_points(from, to, step, geometric)) {
    const TiledRuntime r = tiled_runtime(n, iterations, c);
    if (model == TileModel::Fractional) {
      append_row(out, n, iterations, c, r.fractional_timesteps,
                 r.fractional_seconds, model);
    } else {
      append_row(out, n, iterations, c, static_cast<double>(r.ceil_timesteps),
                 r.ceil_seconds, model);
    }
  }
  return out.str();
}

}  // namespace meshfab
