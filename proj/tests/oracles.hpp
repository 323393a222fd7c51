// Independent reference implementations the tests check the library against.
// Everything here recomputes results from first principles on purpose: a
// byte-array word packer, nested-loop matrix arithmetic, and a dense
// power iteration that never touches the library's transition or schedule
// code paths.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <utility>
#include <vector>

namespace oracle {

// Byte-wise packer for the 64-bit message layout (opcode 0-3, dest 4-15,
// binary32 value 16-47, next opcode 48-51, next dest 52-63, bit 0 = LSB).
inline std::uint64_t pack_word(std::uint8_t opcode, std::uint16_t dest,
                               float value, std::uint8_t next_opcode,
                               std::uint16_t next_dest) {
  std::uint8_t bytes[8] = {};
  bytes[0] = static_cast<std::uint8_t>((opcode & 0x0f) | ((dest & 0x0f) << 4));
  bytes[1] = static_cast<std::uint8_t>(dest >> 4);
  std::uint32_t vb = 0;
  std::memcpy(&vb, &value, sizeof(vb));
  bytes[2] = static_cast<std::uint8_t>(vb & 0xff);
  bytes[3] = static_cast<std::uint8_t>((vb >> 8) & 0xff);
  bytes[4] = static_cast<std::uint8_t>((vb >> 16) & 0xff);
  bytes[5] = static_cast<std::uint8_t>((vb >> 24) & 0xff);
  bytes[6] =
      static_cast<std::uint8_t>((next_opcode & 0x0f) | ((next_dest & 0x0f) << 4));
  bytes[7] = static_cast<std::uint8_t>(next_dest >> 4);
  std::uint64_t word = 0;
  for (int i = 7; i >= 0; --i) word = (word << 8) | bytes[i];
  return word;
}

// Frozen ahead of the build with an out-of-tree packer:
// pack(PROG=0, dest=5, val=1.1f, next=A_ADD=2, ndest=3).
inline constexpr std::uint64_t kGoldenProgWord = 0x00323f8ccccd0050ull;
// pack(PROG=0, dest=0, val=0.0f, next=UPDATE=1, ndest=0).
inline constexpr std::uint64_t kGoldenZeroWord = 0x0001000000000000ull;

// The three-site multiply-and-stream chain, replayed in scalar f32 steps.
struct ChainResult {
  float products[3];
  float final_value;  // update with the nearest product, then add the rest
};

inline ChainResult stream_chain(const float stored[3], const float incoming[3]) {
  ChainResult r{};
  for (int i = 0; i < 3; ++i) r.products[i] = stored[i] * incoming[i];
  float acc = r.products[2];
  acc = acc + r.products[1];
  acc = acc + r.products[0];
  r.final_value = acc;
  return r;
}

// y = A*B in f32, accumulating columns in ascending order from zero, exactly
// the arithmetic the fabric performs.
inline std::vector<float> matvec_f32(const std::vector<std::vector<float>>& a,
                                     const std::vector<float>& b) {
  std::vector<float> y(a.size(), 0.0f);
  for (std::size_t r = 0; r < a.size(); ++r) {
    float acc = 0.0f;
    for (std::size_t c = 0; c < b.size(); ++c) {
      const float p = a[r][c] * b[c];
      acc = acc + p;
    }
    y[r] = acc;
  }
  return y;
}

inline std::vector<double> matvec_f64(const std::vector<std::vector<double>>& a,
                                      const std::vector<double>& b) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < b.size(); ++c) acc += a[r][c] * b[c];
    y[r] = acc;
  }
  return y;
}

// One power-iteration step in f32 with the fabric's operation order.
inline std::vector<float> pagerank_step_f32(
    const std::vector<std::vector<float>>& h, const std::vector<float>& pr,
    float damping) {
  const float teleport = (1.0f - damping) / static_cast<float>(h.size());
  std::vector<float> next = matvec_f32(h, pr);
  for (auto& v : next) {
    v = v * damping;
    v = v + teleport;
  }
  return next;
}

// Dense column-stochastic matrix straight from an edge list, with its own
// degree counting and dangling patch.
inline std::vector<std::vector<double>> transition_from_edges(
    std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
    bool directed) {
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : edges) {
    adj[b][a] = true;  // column a sends to row b
    if (!directed) adj[a][b] = true;
  }
  std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t deg = 0;
    for (std::size_t i = 0; i < n; ++i) deg += adj[i][j] ? 1 : 0;
    if (deg == 0) {
      for (std::size_t i = 0; i < n; ++i) h[i][j] = 1.0 / static_cast<double>(n);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (adj[i][j]) h[i][j] = 1.0 / static_cast<double>(deg);
      }
    }
  }
  return h;
}

// Dense 64-bit power iteration, uniform start.
inline std::vector<double> pagerank_dense(
    std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
    bool directed, double damping, unsigned iterations) {
  const auto h = transition_from_edges(n, edges, directed);
  std::vector<double> pr(n, 1.0 / static_cast<double>(n));
  const double teleport = (1.0 - damping) / static_cast<double>(n);
  for (unsigned k = 0; k < iterations; ++k) {
    std::vector<double> next = matvec_f64(h, pr);
    for (auto& v : next) v = damping * v + teleport;
    pr = std::move(next);
  }
  return pr;
}

// Descending-score order with ascending-index tie break.
inline std::vector<std::uint32_t> top_indices(const std::vector<double>& scores,
                                              std::size_t k) {
  std::vector<std::uint32_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<std::uint32_t>(i);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  if (k < order.size()) order.resize(k);
  return order;
}

}  // namespace oracle
