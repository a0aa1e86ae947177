#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "couplecheck/types.hpp"
#include "couplecheck/value.hpp"

namespace couplecheck {

struct VarInfo {
  std::string name;
  TypePtr type;
};

struct Layout {
  std::vector<VarInfo> vars;
  std::map<std::string, int> index;

  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }
  void add(std::string name, TypePtr type) {
    index[name] = static_cast<int>(vars.size());
    vars.push_back({std::move(name), std::move(type)});
  }
};
using LayoutPtr = std::shared_ptr<const Layout>;

// A store over a layout. `fuel` holds the per-group iteration counters of
// the loops currently running; they are zero between loops.
struct State {
  std::vector<Value> vals;
  std::vector<std::uint32_t> fuel;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State& a, const State& b) {
    if (auto c = a.vals <=> b.vals; c != 0) return c;
    return a.fuel <=> b.fuel;
  }
  std::size_t hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (const auto& v : vals) h = h * 1000003u ^ v.hash();
    for (auto f : fuel) h = h * 31 + f;
    return h;
  }
};

std::string format_state(const State& s, const Layout& layout);

}  // namespace couplecheck

template <>
struct std::hash<couplecheck::State> {
  std::size_t operator()(const couplecheck::State& s) const noexcept { return s.hash(); }
};
