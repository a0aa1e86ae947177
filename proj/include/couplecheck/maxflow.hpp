#pragma once

#include <cstddef>
#include <vector>

#include "couplecheck/rational.hpp"

namespace couplecheck {

// Dinic's algorithm on arbitrary-precision integer capacities.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adj_(nodes) {}

  // returns the edge id, usable with flow_on()
  std::size_t add_edge(std::size_t from, std::size_t to, const BigInt& cap);
  BigInt run(std::size_t s, std::size_t t);
  const BigInt& flow_on(std::size_t edge) const { return edges_[edge].flow; }
  // nodes reachable from s in the residual graph after run()
  std::vector<bool> source_side(std::size_t s) const;

 private:
  struct Edge {
    std::size_t to;
    BigInt cap;
    BigInt flow;
  };
  bool bfs(std::size_t s, std::size_t t);
  BigInt dfs(std::size_t v, std::size_t t, const BigInt& pushed);

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace couplecheck
