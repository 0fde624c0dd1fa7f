#pragma once

// Reference implementations used only by the tests. They are deliberately
// written differently from the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "fastslow/grid_world.hpp"
#include "fastslow/memory.hpp"
#include "fastslow/neural.hpp"

namespace oracle {

using fastslow::Action;
using fastslow::GridPos;

// Dijkstra with a binary heap over a plain boolean wall matrix. Unit weights
// make it equivalent to BFS in result but not in mechanics.
inline std::optional<int> dijkstra(const std::vector<std::vector<bool>>& wall, GridPos s, GridPos g) {
  const int n = static_cast<int>(wall.size());
  const int inf = std::numeric_limits<int>::max();
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), inf));
  using Item = std::tuple<int, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[s.y][s.x] = 0;
  heap.emplace(0, s.x, s.y);
  const int dx[] = {1, -1, 0, 0};
  const int dy[] = {0, 0, 1, -1};
  while (!heap.empty()) {
    auto [d, x, y] = heap.top();
    heap.pop();
    if (d > dist[y][x]) continue;
    if (x == g.x && y == g.y) return d;
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (nx < 0 || ny < 0 || nx >= n || ny >= n || wall[ny][nx]) continue;
      if (d + 1 < dist[ny][nx]) {
        dist[ny][nx] = d + 1;
        heap.emplace(d + 1, nx, ny);
      }
    }
  }
  return std::nullopt;
}

inline std::vector<std::vector<bool>> wall_matrix(const fastslow::ObstacleGrid& grid) {
  const int n = grid.size();
  std::vector<std::vector<bool>> wall(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (const auto& p : grid.cells()) wall[p.y][p.x] = true;
  return wall;
}

// Length of the shortest chain of stored transitions from s to g (at least one
// transition, so s == g asks for the shortest cycle).
inline std::optional<int> bank_shortest(const fastslow::MemoryBank& bank, GridPos s, GridPos g) {
  std::map<GridPos, std::vector<GridPos>> edges;
  for (const auto& r : bank.records()) edges[r.state].push_back(r.next_state);
  std::map<GridPos, int> dist;
  std::queue<GridPos> frontier;
  for (const auto& next : edges[s]) {
    if (next == g) return 1;
    if (dist.emplace(next, 1).second) frontier.push(next);
  }
  while (!frontier.empty()) {
    const GridPos cur = frontier.front();
    frontier.pop();
    for (const auto& next : edges[cur]) {
      if (next == g) return dist[cur] + 1;
      if (dist.emplace(next, dist[cur] + 1).second) frontier.push(next);
    }
  }
  return std::nullopt;
}

// True when `trajectory` starts at s, follows stored transitions and lands on g.
inline bool replays_to_goal(const fastslow::MemoryBank& bank, std::span<const fastslow::StateAction> trajectory,
                            GridPos s, GridPos g) {
  if (trajectory.empty()) return false;
  GridPos cur = s;
  for (const auto& step : trajectory) {
    if (step.state != cur) return false;
    std::optional<GridPos> next;
    for (const auto& [a, s2] : bank.lookup(cur)) {
      if (a == step.action) next = s2;
    }
    if (!next) return false;
    cur = *next;
  }
  return cur == g;
}

// Pearson chi-square statistic against a uniform expectation.
inline double chi_square_uniform(std::span<const int> counts) {
  double total = 0;
  for (int c : counts) total += c;
  const double expected = total / static_cast<double>(counts.size());
  double chi = 0;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

// 0.999 quantile of chi-square with 3 degrees of freedom.
inline constexpr double kChi2Df3Q999 = 16.266;
// 0.999 quantile of chi-square with 1 degree of freedom.
inline constexpr double kChi2Df1Q999 = 10.828;

inline GridPos random_cell(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> d(0, n - 1);
  const int x = d(rng);
  return {x, d(rng)};
}

}  // namespace oracle
