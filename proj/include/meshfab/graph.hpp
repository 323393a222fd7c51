#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "meshfab/schedule.hpp"  // ParseError

namespace meshfab {

// A node-labelled interaction network. Edges are stored as index pairs;
// undirected graphs treat (a,b) and (b,a) as the same edge.
struct Graph {
  std::vector<std::string> labels;            // dense indices, first-appearance order
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // deduplicated
  bool directed = false;

  std::size_t node_count() const { return labels.size(); }
};

// Tab- or space-separated edge list, one `<labelA> <labelB>` pair per line,
// '#' comments. Duplicate edges collapse; self-loops stay. Empty graphs are
// rejected.
Graph load_graph(std::string_view text, bool directed = false);
Graph load_graph_file(const std::string& path, bool directed = false);

std::string format_edge_list(const Graph& g);

// Seeded preferential-attachment network: nodes P0..P<n-1>, each newcomer
// attaching `edges_per_node` distinct neighbours sampled proportionally to
// degree. Deterministic for a given (n, edges_per_node, seed).
Graph generate_network(std::uint32_t n_nodes, std::uint32_t edges_per_node,
                       std::uint64_t seed);

}  // namespace meshfab
