#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fastslow/grid_world.hpp"

namespace fastslow {

enum class AxisBias { XFirst, YFirst };

/// Action set of the prediction benchmark; the environment itself has no DontMove.
enum class BenchAction : std::uint8_t { Up, Down, Left, Right, DontMove };
inline constexpr int kNumBenchActions = 5;

std::string_view to_string(BenchAction a) noexcept;
GridPos apply(GridPos p, BenchAction a) noexcept;

/// Length of the shortest 4-connected path avoiding obstacles, or nullopt when
/// the goal cannot be reached.
std::optional<int> bfs_min_steps(const ObstacleGrid& grid, GridPos start, GridPos goal);

/// Distances from `from` to every cell in row-major order; -1 marks unreachable
/// or blocked cells.
std::vector<int> bfs_distance_field(const ObstacleGrid& grid, GridPos from);

/// Greedy move toward the goal on an empty grid, preferring the biased axis.
BenchAction greedy_label(GridPos start, GridPos goal, AxisBias bias) noexcept;
GridPos greedy_next_state(GridPos start, GridPos goal, AxisBias bias) noexcept;

}  // namespace fastslow
