#include "meshfab/transition.hpp"

#include <set>
#include <vector>

namespace meshfab {

TransitionMatrix build_transition(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  std::vector<std::set<std::uint32_t>> out(g.node_count());
  for (const auto& [a, b] : g.edges) {
    out[a].insert(b);
    if (!g.directed) out[b].insert(a);
  }

  std::vector<Eigen::Triplet<double>> entries;
  for (std::uint32_t j = 0; j < g.node_count(); ++j) {
    if (out[j].empty()) {
      // Dangling column: uniform patch keeps the matrix column-stochastic.
      for (Eigen::Index i = 0; i < n; ++i) {
        entries.emplace_back(i, j, 1.0 / static_cast<double>(n));
      }
      continue;
    }
    const double w = 1.0 / static_cast<double>(out[j].size());
    for (const auto i : out[j]) entries.emplace_back(i, j, w);
  }

  TransitionMatrix t;
  t.H.resize(n, n);
  t.H.setFromTriplets(entries.begin(), entries.end());
  t.H.makeCompressed();
  return t;
}

}  // namespace meshfab
