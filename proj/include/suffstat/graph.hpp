#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "suffstat/error.hpp"

namespace suffstat {

// Undirected edge with 0-indexed endpoints, first < second.
using Edge = std::pair<std::size_t, std::size_t>;

// Simple k-regular graph on vertices 0..p-1.
class Graph {
 public:
  Graph() = default;

  Graph(std::size_t p, std::size_t k, std::vector<Edge> edges) : p_(p), k_(k), adjacency_(p) {
    require(p >= 1, "graph: need at least one vertex");
    std::set<Edge> seen;
    for (auto [a, b] : edges) {
      require(a < p && b < p, "graph: endpoint out of range");
      require(a != b, "graph: self-loop");
      if (a > b) std::swap(a, b);
      require(seen.insert({a, b}).second, "graph: duplicate edge");
      adjacency_[a].push_back(b);
      adjacency_[b].push_back(a);
    }
    edges_.assign(seen.begin(), seen.end());
    for (auto& nbrs : adjacency_) {
      std::sort(nbrs.begin(), nbrs.end());
      require(nbrs.size() == k, "graph: vertex degree differs from k");
    }
  }

  std::size_t vertex_count() const noexcept { return p_; }
  std::size_t degree() const noexcept { return k_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t p_ = 0;
  std::size_t k_ = 0;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Edge> edges_;
};

// The cycle 0-1-...-(p-1)-0; needs p >= 3.
inline Graph cycle_graph(std::size_t p) {
  require(p >= 3, "cycle_graph: need p >= 3");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < p; ++i) edges.emplace_back(i, (i + 1) % p);
  return Graph(p, 2, std::move(edges));
}

// Pairing (configuration) model: shuffle p*k half-edges, pair them up, and
// reject any pairing with a loop or a repeated edge.
inline Graph random_regular_graph(std::size_t p, std::size_t k, std::uint64_t seed,
                                  int max_attempts = 100000) {
  require(p >= 1, "random_regular_graph: p must be positive");
  require(k < p, "random_regular_graph: need k < p");
  require((p * k) % 2 == 0, "random_regular_graph: p*k must be even");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> points(p * k);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = i / k;
    std::shuffle(points.begin(), points.end(), rng);

    std::set<Edge> edges;
    bool simple = true;
    for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
      auto a = points[i];
      auto b = points[i + 1];
      if (a == b) { simple = false; break; }
      if (a > b) std::swap(a, b);
      if (!edges.insert({a, b}).second) { simple = false; break; }
    }
    if (simple) return Graph(p, k, {edges.begin(), edges.end()});
  }
  fail(ErrorKind::precondition, "random_regular_graph: retry limit exceeded");
}

// Text format: "p k" then one "i j" line per edge, 1-indexed, i < j.
inline Graph read_graph(std::istream& in) {
  std::size_t p = 0;
  std::size_t k = 0;
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {}
  {
    std::istringstream header(line);
    require(static_cast<bool>(header >> p >> k), "graph file: bad header");
  }
  std::vector<Edge> edges;
  std::set<Edge> seen;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    long long i = 0;
    long long j = 0;
    require(static_cast<bool>(row >> i >> j), "graph file: bad edge line '" + line + "'");
    require(i != j, "graph file: self-loop");
    require(i >= 1 && j >= 1 && static_cast<std::size_t>(std::max(i, j)) <= p,
            "graph file: endpoint out of range");
    require(i < j, "graph file: edges must be written with i < j");
    Edge e{static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)};
    require(seen.insert(e).second, "graph file: duplicate edge");
    edges.push_back(e);
  }
  return Graph(p, k, std::move(edges));
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << g.vertex_count() << ' ' << g.degree() << '\n';
  for (auto [a, b] : g.edges()) out << a + 1 << ' ' << b + 1 << '\n';
}

}  // namespace suffstat
