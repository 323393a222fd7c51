#include "meshfab/scheduler.hpp"

#include <algorithm>
#include <map>

namespace meshfab {

namespace {

MessageWord prog_word(std::uint16_t dest, float value, Opcode next,
                      std::uint16_t next_dest) {
  MessageWord m;
  m.opcode = Opcode::Prog;
  m.destination = dest;
  m.value = value;
  m.next_opcode = next;
  m.next_destination = next_dest;
  return m;
}

MessageWord bus_word(Opcode op, float value) {
  MessageWord m;
  m.opcode = op;
  m.value = value;
  return m;
}

void push(InjectionSchedule& s, std::uint64_t t, InjectAction a) {
  s.actions.push_back({t, std::move(a)});
}
void push(InjectionSchedule& s, std::uint64_t t, BroadcastAction a) {
  s.actions.push_back({t, std::move(a)});
}
void push(InjectionSchedule& s, std::uint64_t t, ReduceAction a) {
  s.actions.push_back({t, std::move(a)});
}
void push(InjectionSchedule& s, std::uint64_t t, OffloadAction a) {
  s.actions.push_back({t, std::move(a)});
}

// Emits one tile's load / multiply / reduce / offload stages starting at
// base_cycle. Rows land bottom-up so that every row is consumed on the last
// load cycle. Returns the cycle after the tile's offload.
std::uint64_t emit_tile(InjectionSchedule& sched, const Eigen::MatrixXf& A,
                        const Eigen::VectorXf& B, const FabricConfig& cfg,
                        std::uint64_t base_cycle, std::uint32_t row0,
                        std::uint32_t col0, std::uint32_t rows_eff,
                        std::uint32_t cols_eff, std::uint16_t sink_col,
                        bool init_sinks) {
  for (std::uint32_t t = 0; t < rows_eff; ++t) {
    const std::uint32_t r = rows_eff - 1 - t;  // last row first
    const std::uint16_t sink = cfg.site(static_cast<std::uint16_t>(r), sink_col);
    for (std::uint32_t c = 0; c < cols_eff; ++c) {
      const float a = A(static_cast<Eigen::Index>(row0 + r),
                        static_cast<Eigen::Index>(col0 + c));
      push(sched, base_cycle + t,
           InjectAction{{Port::Side::TopEdge, static_cast<std::uint16_t>(c)},
                        prog_word(cfg.site(static_cast<std::uint16_t>(r),
                                           static_cast<std::uint16_t>(c)),
                                  a, Opcode::Add, sink)});
    }
    if (init_sinks) {
      push(sched, base_cycle + t,
           InjectAction{{Port::Side::TopEdge, sink_col},
                        prog_word(sink, 0.0f, Opcode::Update, sink)});
    }
  }
  const std::uint64_t multiply_cycle = base_cycle + rows_eff;
  for (std::uint32_t c = 0; c < cols_eff; ++c) {
    push(sched, multiply_cycle,
         BroadcastAction{static_cast<std::uint16_t>(c),
                         bus_word(Opcode::MulS,
                                  B(static_cast<Eigen::Index>(col0 + c))),
                         rows_eff});
  }
  OffloadAction off;
  for (std::uint32_t r = 0; r < rows_eff; ++r) {
    const std::uint16_t sink = cfg.site(static_cast<std::uint16_t>(r), sink_col);
    push(sched, multiply_cycle + 1,
         ReduceAction{static_cast<std::uint16_t>(r), Opcode::Add, sink});
    off.sites.push_back(sink);
  }
  push(sched, multiply_cycle + 2, std::move(off));
  return multiply_cycle + 3;
}

void check_shapes(const Eigen::MatrixXf& A, const Eigen::VectorXf& B) {
  if (A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument("matrix must be at least 1x1");
  }
  if (B.size() != A.cols()) {
    throw std::invalid_argument("vector length must match matrix columns");
  }
}

}  // namespace

bool fits_untiled(Eigen::Index n_rows, Eigen::Index n_cols,
                  const FabricConfig& cfg) {
  return n_rows <= cfg.rows && n_cols + 1 <= cfg.cols &&
         n_rows * n_cols + n_rows <=
             static_cast<Eigen::Index>(cfg.site_count());
}

std::vector<std::uint16_t> matvec_sink_sites(Eigen::Index n_rows,
                                             Eigen::Index n_cols,
                                             const FabricConfig& cfg) {
  std::vector<std::uint16_t> sinks;
  sinks.reserve(static_cast<std::size_t>(n_rows));
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    sinks.push_back(cfg.site(static_cast<std::uint16_t>(r),
                             static_cast<std::uint16_t>(n_cols)));
  }
  return sinks;
}

InjectionSchedule build_matvec(const Eigen::MatrixXf& A,
                               const Eigen::VectorXf& B,
                               const FabricConfig& cfg) {
  check_shapes(A, B);
  const auto n = static_cast<std::uint32_t>(A.rows());
  const auto m = static_cast<std::uint32_t>(A.cols());
  if (!fits_untiled(A.rows(), A.cols(), cfg)) {
    throw NeedsTilingError("matrix of " + std::to_string(n) + "x" +
                           std::to_string(m) +
                           " does not fit untiled; use the tiled builder");
  }
  InjectionSchedule sched;
  emit_tile(sched, A, B, cfg, 0, 0, 0, n, m,
            static_cast<std::uint16_t>(m), /*init_sinks=*/true);
  sched.expected_timesteps = n + 3;
  sched.validate();
  return sched;
}

std::pair<TilePlan, InjectionSchedule> build_tiled_matvec(
    const Eigen::MatrixXf& A, const Eigen::VectorXf& B,
    const FabricConfig& cfg) {
  check_shapes(A, B);
  if (cfg.cols < 2) {
    throw NeedsTilingError("tiling needs a fabric of at least 1x2");
  }
  const auto n = static_cast<std::uint32_t>(A.rows());
  const auto m = static_cast<std::uint32_t>(A.cols());

  TilePlan plan;
  plan.tile_rows = cfg.rows;
  plan.tile_cols = cfg.cols - 1;
  plan.row_blocks = (n + plan.tile_rows - 1) / plan.tile_rows;
  plan.col_blocks = (m + plan.tile_cols - 1) / plan.tile_cols;
  // A single column block keeps the untiled sink placement so the degenerate
  // plan serializes identically to build_matvec.
  plan.sink_col = plan.col_blocks == 1 ? static_cast<std::uint16_t>(m)
                                       : static_cast<std::uint16_t>(cfg.cols - 1);

  InjectionSchedule sched;
  std::uint64_t base = 0;
  for (std::uint32_t rb = 0; rb < plan.row_blocks; ++rb) {
    const std::uint32_t row0 = rb * plan.tile_rows;
    const std::uint32_t rows_eff = std::min(plan.tile_rows, n - row0);
    for (std::uint32_t cb = 0; cb < plan.col_blocks; ++cb) {
      const std::uint32_t col0 = cb * plan.tile_cols;
      const std::uint32_t cols_eff = std::min(plan.tile_cols, m - col0);
      plan.tiles.push_back({rb, cb, base, rows_eff, cols_eff});
      base = emit_tile(sched, A, B, cfg, base, row0, col0, rows_eff, cols_eff,
                       plan.sink_col, /*init_sinks=*/cb == 0);
    }
    // This row block's results are the offloads of its last column block.
    const std::uint64_t offload_cycle = base - 1;
    for (std::uint32_t r = 0; r < rows_eff; ++r) {
      plan.readout.push_back(
          {row0 + r, offload_cycle,
           cfg.site(static_cast<std::uint16_t>(r), plan.sink_col)});
    }
  }
  sched.expected_timesteps = base;
  sched.validate();
  return {std::move(plan), std::move(sched)};
}

InjectionSchedule build_pagerank_iteration(const Eigen::MatrixXf& H,
                                           const Eigen::VectorXf& pr_prev,
                                           float damping,
                                           const FabricConfig& cfg) {
  check_shapes(H, pr_prev);
  if (H.rows() != H.cols()) {
    throw std::invalid_argument("transition matrix must be square");
  }
  const auto n = static_cast<std::uint32_t>(H.rows());
  if (!fits_untiled(H.rows(), H.cols(), cfg)) {
    throw NeedsTilingError("transition matrix of " + std::to_string(n) + "x" +
                           std::to_string(n) +
                           " does not fit untiled; use the tiled builder");
  }
  InjectionSchedule sched = build_matvec(H, pr_prev, cfg);
  const auto sink_col = static_cast<std::uint16_t>(n);
  const float teleport = (1.0f - damping) / static_cast<float>(n);

  push(sched, n + 3, BroadcastAction{sink_col, bus_word(Opcode::Mul, damping), n});
  push(sched, n + 4, BroadcastAction{sink_col, bus_word(Opcode::Add, teleport), n});
  OffloadAction off{matvec_sink_sites(H.rows(), H.cols(), cfg)};
  push(sched, n + 5, std::move(off));
  sched.expected_timesteps = n + 6;
  sched.validate();
  return sched;
}

std::pair<TilePlan, InjectionSchedule> build_tiled_pagerank_iteration(
    const Eigen::MatrixXf& H, const Eigen::VectorXf& pr_prev, float damping,
    const FabricConfig& cfg) {
  check_shapes(H, pr_prev);
  if (H.rows() != H.cols()) {
    throw std::invalid_argument("transition matrix must be square");
  }
  if (cfg.cols < 2) {
    throw NeedsTilingError("tiling needs a fabric of at least 1x2");
  }
  const auto n = static_cast<std::uint32_t>(H.rows());

  TilePlan plan;
  plan.tile_rows = cfg.rows;
  plan.tile_cols = cfg.cols - 1;
  plan.row_blocks = (n + plan.tile_rows - 1) / plan.tile_rows;
  plan.col_blocks = (n + plan.tile_cols - 1) / plan.tile_cols;
  plan.sink_col = plan.col_blocks == 1 ? static_cast<std::uint16_t>(n)
                                       : static_cast<std::uint16_t>(cfg.cols - 1);

  InjectionSchedule sched;
  std::uint64_t base = 0;
  for (std::uint32_t rb = 0; rb < plan.row_blocks; ++rb) {
    const std::uint32_t row0 = rb * plan.tile_rows;
    const std::uint32_t rows_eff = std::min(plan.tile_rows, n - row0);
    for (std::uint32_t cb = 0; cb < plan.col_blocks; ++cb) {
      const std::uint32_t col0 = cb * plan.tile_cols;
      const std::uint32_t cols_eff = std::min(plan.tile_cols, n - col0);
      plan.tiles.push_back({rb, cb, base, rows_eff, cols_eff});
      base = emit_tile(sched, H, pr_prev, cfg, base, row0, col0, rows_eff,
                       cols_eff, plan.sink_col, /*init_sinks=*/cb == 0);
    }
    // Scale the accumulated row sums, add the teleport term, read out.
    const float teleport = (1.0f - damping) / static_cast<float>(n);
    push(sched, base,
         BroadcastAction{plan.sink_col, bus_word(Opcode::Mul, damping), rows_eff});
    push(sched, base + 1,
         BroadcastAction{plan.sink_col, bus_word(Opcode::Add, teleport), rows_eff});
    OffloadAction off;
    for (std::uint32_t r = 0; r < rows_eff; ++r) {
      off.sites.push_back(cfg.site(static_cast<std::uint16_t>(r), plan.sink_col));
    }
    push(sched, base + 2, std::move(off));
    for (std::uint32_t r = 0; r < rows_eff; ++r) {
      plan.readout.push_back(
          {row0 + r, base + 2,
           cfg.site(static_cast<std::uint16_t>(r), plan.sink_col)});
    }
    base += 3;
  }
  sched.expected_timesteps = base;
  sched.validate();
  return {std::move(plan), std::move(sched)};
}

Eigen::VectorXf extract_tiled_result(const TilePlan& plan,
                                     const RunResult& run) {
  std::map<std::pair<std::uint64_t, std::uint16_t>, float> readings;
  for (const auto& rec : run.offloads) {
    readings[{rec.cycle, rec.site}] = rec.value;
  }
  Eigen::Index n = 0;
  for (const auto& r : plan.readout) {
    n = std::max(n, static_cast<Eigen::Index>(r.output_row) + 1);
  }
  Eigen::VectorXf out(n);
  for (const auto& r : plan.readout) {
    const auto it = readings.find({r.offload_cycle, r.site});
    if (it == readings.end()) {
      throw SimError("missing offload reading for output row " +
                     std::to_string(r.output_row));
    }
    out(static_cast<Eigen::Index>(r.output_row)) = it->second;
  }
  return out;
}

}  // namespace meshfab
