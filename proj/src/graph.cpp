#include "meshfab/graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace meshfab {

namespace {

std::pair<std::uint32_t, std::uint32_t> normalize_edge(std::uint32_t a,
                                                       std::uint32_t b,
                                                       bool directed) {
  if (!directed && b < a) std::swap(a, b);
  return {a, b};
}

}  // namespace

Graph load_graph(std::string_view text, bool directed) {
  Graph g;
  g.directed = directed;
  std::unordered_map<std::string, std::uint32_t> index;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    std::istringstream ss{std::string(line)};
    std::string a, b, extra;
    if (!(ss >> a)) continue;  // blank line
    if (!(ss >> b) || (ss >> extra)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected exactly two labels");
    }
    const auto lookup = [&](std::string& label) {
      const auto it = index.find(label);
      if (it != index.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(g.labels.size());
      index.emplace(label, id);
      g.labels.push_back(std::move(label));
      return id;
    };
    const std::uint32_t ia = lookup(a);
    const std::uint32_t ib = lookup(b);
    const auto key = normalize_edge(ia, ib, directed);
    if (seen.insert(key).second) g.edges.push_back(key);
  }
  if (g.labels.empty()) {
    throw ParseError("edge list is empty");
  }
  return g;
}

Graph load_graph_file(const std::string& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_graph(ss.str(), directed);
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  for (const auto& [a, b] : g.edges) {
    out << g.labels[a] << "\t" << g.labels[b] << "\n";
  }
  return out.str();
}

Graph generate_network(std::uint32_t n_nodes, std::uint32_t edges_per_node,
                       std::uint64_t seed) {
  if (n_nodes < 2) throw std::invalid_argument("network needs at least 2 nodes");
  const std::uint32_t m = std::max<std::uint32_t>(1, edges_per_node);

  Graph g;
  g.directed = false;
  g.labels.reserve(n_nodes);
  for (std::uint32_t i = 0; i < n_nodes; ++i) {
    g.labels.push_back("P" + std::to_string(i));
  }

  std::mt19937_64 rng(seed);
  // Repeated-endpoint sampling gives degree-proportional attachment without
  // maintaining explicit weights.
  std::vector<std::uint32_t> endpoints;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  const auto add_edge = [&](std::uint32_t a, std::uint32_t b) {
    const auto key = normalize_edge(a, b, false);
    if (!seen.insert(key).second) return false;
    g.edges.push_back(key);
    endpoints.push_back(a);
    endpoints.push_back(b);
    return true;
  };

  const std::uint32_t core = std::min(n_nodes, m + 1);
  for (std::uint32_t a = 0; a < core; ++a) {
    for (std::uint32_t b = a + 1; b < core; ++b) add_edge(a, b);
  }
  for (std::uint32_t v = core; v < n_nodes; ++v) {
    std::uint32_t attached = 0;
    std::uint32_t attempts = 0;
    while (attached < m && attempts < 64 * m) {
      ++attempts;
      const auto target = endpoints[rng() % endpoints.size()];
      if (target == v) continue;
      if (add_edge(v, target)) ++attached;
    }
  }
  return g;
}

}  // namespace meshfab
