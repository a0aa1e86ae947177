#include "couplecheck/maxflow.hpp"

#include <deque>

namespace couplecheck {

std::size_t MaxFlow::add_edge(std::size_t from, std::size_t to, const BigInt& cap) {
  std::size_t id = edges_.size();
  edges_.push_back({to, cap, 0});
  adj_[from].push_back(id);
  edges_.push_back({from, 0, 0});
  adj_[to].push_back(id + 1);
  return id;
}

bool MaxFlow::bfs(std::size_t s, std::size_t t) {
  level_.assign(adj_.size(), -1);
  std::deque<std::size_t> q{s};
  level_[s] = 0;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    for (auto id : adj_[v]) {
      const auto& e = edges_[id];
      if (level_[e.to] < 0 && e.cap > e.flow) {
        level_[e.to] = level_[v] + 1;
        q.push_back(e.to);
      }
    }
  }
  return level_[t] >= 0;
}

BigInt MaxFlow::dfs(std::size_t v, std::size_t t, const BigInt& pushed) {
  if (v == t || pushed == 0) return pushed;
  for (auto& i = it_[v]; i < adj_[v].size(); ++i) {
    auto id = adj_[v][i];
    auto& e = edges_[id];
    if (level_[e.to] != level_[v] + 1 || e.cap <= e.flow) continue;
    BigInt room = e.cap - e.flow;
    BigInt got = dfs(e.to, t, room < pushed ? room : pushed);
    if (got > 0) {
      e.flow += got;
      edges_[id ^ 1].flow -= got;
      return got;
    }
  }
  return 0;
}

BigInt MaxFlow::run(std::size_t s, std::size_t t) {
  BigInt total = 0;
  BigInt inf = 0;
  for (auto id : adj_[s]) inf += edges_[id].cap;
  inf += 1;
  while (bfs(s, t)) {
    it_.assign(adj_.size(), 0);
    while (true) {
      BigInt f = dfs(s, t, inf);
      if (f == 0) break;
      total += f;
    }
  }
  return total;
}

std::vector<bool> MaxFlow::source_side(std::size_t s) const {
  std::vector<bool> seen(adj_.size(), false);
  std::deque<std::size_t> q{s};
  seen[s] = true;
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    for (auto id : adj_[v]) {
      const auto& e = edges_[id];
      if (!seen[e.to] && e.cap > e.flow) {
        seen[e.to] = true;
        q.push_back(e.to);
      }
    }
  }
  return seen;
}

}  // namespace couplecheck
