#include "fastslow/oracle.hpp"

#include <deque>
#include <stdexcept>

namespace fastslow {

std::string_view to_string(BenchAction a) noexcept {
  switch (a) {
    case BenchAction::Up:
      return "up";
    case BenchAction::Down:
      return "down";
    case BenchAction::Left:
      return "left";
    case BenchAction::Right:
      return "right";
    case BenchAction::DontMove:
      return "stay";
  }
  return "?";
}

GridPos apply(GridPos p, BenchAction a) noexcept {
  if (a == BenchAction::DontMove) return p;
  return displaced(p, static_cast<Action>(a));
}

std::vector<int> bfs_distance_field(const ObstacleGrid& grid, GridPos from) {
  const int n = grid.size();
  std::vector<int> dist(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
  if (!grid.is_free(from)) return dist;

  auto at = [n](GridPos p) { return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(n) +
                                    static_cast<std::size_t>(p.x); };
  std::deque<GridPos> frontier{from};
  dist[at(from)] = 0;
  while (!frontier.empty()) {
    const GridPos cur = frontier.front();
    frontier.pop_front();
    for (Action a : kAllActions) {
      const GridPos next = displaced(cur, a);
      if (!grid.is_free(next) || dist[at(next)] >= 0) continue;
      dist[at(next)] = dist[at(cur)] + 1;
      frontier.push_back(next);
    }
  }
  return dist;
}

std::optional<int> bfs_min_steps(const ObstacleGrid& grid, GridPos start, GridPos goal) {
  if (!grid.is_free(start) || !grid.is_free(goal)) {
    throw std::invalid_argument("bfs_min_steps: start and goal must be free in-bounds cells");
  }
  if (start == goal) return 0;
  const auto dist = bfs_distance_field(grid, start);
  const int d = dist[static_cast<std::size_t>(goal.y) * static_cast<std::size_t>(grid.size()) +
                     static_cast<std::size_t>(goal.x)];
  if (d < 0) return std::nullopt;
  return d;
}

namespace {

std::optional<BenchAction> toward_x(GridPos s, GridPos g) noexcept {
  if (s.x < g.x) return BenchAction::Right;
  if (s.x > g.x) return BenchAction::Left;
  return std::nullopt;
}

std::optional<BenchAction> toward_y(GridPos s, GridPos g) noexcept {
  if (s.y < g.y) return BenchAction::Down;
  if (s.y > g.y) return BenchAction::Up;
  return std::nullopt;
}

}  // namespace

BenchAction greedy_label(GridPos start, GridPos goal, AxisBias bias) noexcept {
  const auto first = bias == AxisBias::XFirst ? toward_x(start, goal) : toward_y(start, goal);
  if (first) return *first;
  const auto second = bias == AxisBias::XFirst ? toward_y(start, goal) : toward_x(start, goal);
  return second.value_or(BenchAction::DontMove);
}

GridPos greedy_next_state(GridPos start, GridPos goal, AxisBias bias) noexcept {
  return apply(start, greedy_label(start, goal, bias));
}

}  // namespace fastslow
