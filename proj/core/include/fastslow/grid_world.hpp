#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fastslow/rng.hpp"

namespace fastslow {

/// Cell coordinates. x is the column, y the row; the origin is the top-left
/// corner and Up decreases y.
struct GridPos {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const GridPos&, const GridPos&) = default;
};

enum class Action : std::uint8_t { Up, Down, Left, Right };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions{Action::Up, Action::Down, Action::Left,
                                                             Action::Right};

constexpr int index_of(Action a) noexcept { return static_cast<int>(a); }
constexpr Action action_from_index(int i) noexcept { return static_cast<Action>(i); }

/// The cell one step away in direction `a`, without any bounds check.
constexpr GridPos displaced(GridPos p, Action a) noexcept {
  switch (a) {
    case Action::Up:
      return {p.x, p.y - 1};
    case Action::Down:
      return {p.x, p.y + 1};
    case Action::Left:
      return {p.x - 1, p.y};
    case Action::Right:
      return {p.x + 1, p.y};
  }
  return p;
}

std::string_view to_string(Action a) noexcept;
std::optional<Action> parse_action(std::string_view text) noexcept;

constexpr int manhattan(GridPos a, GridPos b) noexcept {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

/// Blocked-cell map of an n x n grid.
class ObstacleGrid {
 public:
  ObstacleGrid() = default;
  explicit ObstacleGrid(int n);
  ObstacleGrid(int n, std::span<const GridPos> blocked);

  int size() const noexcept { return n_; }
  bool in_bounds(GridPos p) const noexcept { return p.x >= 0 && p.y >= 0 && p.x < n_ && p.y < n_; }
  bool blocked(GridPos p) const noexcept { return in_bounds(p) && cells_[offset(p)] != 0; }
  bool is_free(GridPos p) const noexcept { return in_bounds(p) && cells_[offset(p)] == 0; }

  void insert(GridPos p);
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  /// Blocked cells in row-major order.
  std::vector<GridPos> cells() const;
  /// Free cells in row-major order.
  std::vector<GridPos> free_cells() const;

  friend bool operator==(const ObstacleGrid&, const ObstacleGrid&) = default;

 private:
  std::size_t offset(GridPos p) const noexcept {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(p.x);
  }

  int n_ = 0;
  std::vector<std::uint8_t> cells_;
  std::size_t count_ = 0;
};

enum class EnvMode { Static, Dynamic };
enum class WallPhase { Pre, Post };

std::string_view to_string(EnvMode m) noexcept;
std::optional<EnvMode> parse_env_mode(std::string_view text) noexcept;

struct GridWorldConfig {
  int size = 10;
  EnvMode mode = EnvMode::Static;
  /// Last episode (1-based) that uses the pre-switch wall.
  int switch_episode = 50;
  /// Per-episode step budget; 0 means size * size.
  int max_steps = 0;
  std::uint64_t seed = 0;

  int step_budget() const noexcept { return max_steps > 0 ? max_steps : size * size; }
  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

struct StepOutcome {
  GridPos next_state;
  int reward = 0;
  bool done = false;
  bool truncated = false;
};

struct EpisodeLayout {
  GridPos start;
  GridPos goal;
  ObstacleGrid obstacles;
};

/// Pre phase: column n/2 blocked except row n/2. Post phase: row n/2 blocked
/// except column n/2. Both leave the centre cell open as the gap.
ObstacleGrid wall_layout(int n, WallPhase phase);

/// Start, goal and obstacles for `episode` (1-based). Static mode is fixed;
/// dynamic mode samples a mutually reachable start != goal over free cells.
/// Throws std::runtime_error when no reachable pair exists.
EpisodeLayout reset_episode(const GridWorldConfig& config, int episode, Rng& rng);

/// Moves one cell; collisions with the border or an obstacle leave the agent in
/// place. `steps_taken` counts the steps before this one.
StepOutcome step(GridPos state, Action action, GridPos goal, const ObstacleGrid& obstacles,
                 int steps_taken, int max_steps) noexcept;

/// Row-major text dump: '.' free, '#' obstacle, 'S' start, 'G' goal.
std::string render_layout(const ObstacleGrid& obstacles, std::optional<GridPos> start = std::nullopt,
                          std::optional<GridPos> goal = std::nullopt);

/// Stateful wrapper that tracks position and step budget for one episode at a time.
class GridWorld {
 public:
  explicit GridWorld(GridWorldConfig config);

  const EpisodeLayout& reset(int episode);
  StepOutcome step(Action action);

  const GridWorldConfig& config() const noexcept { return config_; }
  const EpisodeLayout& layout() const noexcept { return layout_; }
  GridPos state() const noexcept { return state_; }
  GridPos goal() const noexcept { return layout_.goal; }
  int steps_taken() const noexcept { return steps_; }
  int max_steps() const noexcept { return config_.step_budget(); }
  bool finished() const noexcept { return finished_; }
  /// Shortest start-to-goal distance of the current episode.
  int min_steps() const noexcept { return min_steps_; }

 private:
  GridWorldConfig config_;
  Rng rng_;
  EpisodeLayout layout_;
  GridPos state_;
  int steps_ = 0;
  int min_steps_ = 0;
  bool finished_ = true;
};

}  // namespace fastslow

template <>
struct std::hash<fastslow::GridPos> {
  std::size_t operator()(fastslow::GridPos p) const noexcept {
    const auto packed = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
                        static_cast<std::uint32_t>(p.y);
    return static_cast<std::size_t>(fastslow::mix64(packed));
  }
};
