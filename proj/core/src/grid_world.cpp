#include "fastslow/grid_world.hpp"

#include <stdexcept>
#include <string>

#include "fastslow/oracle.hpp"

namespace fastslow {

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::Up:
      return "up";
    case Action::Down:
      return "down";
    case Action::Left:
      return "left";
    case Action::Right:
      return "right";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view text) noexcept {
  for (Action a : kAllActions) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

std::string_view to_string(EnvMode m) noexcept { return m == EnvMode::Static ? "static" : "dynamic"; }

std::optional<EnvMode> parse_env_mode(std::string_view text) noexcept {
  if (text == "static") return EnvMode::Static;
  if (text == "dynamic") return EnvMode::Dynamic;
  return std::nullopt;
}

ObstacleGrid::ObstacleGrid(int n) : n_(n), cells_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
  if (n < 1) throw std::invalid_argument("ObstacleGrid: size must be positive");
}

ObstacleGrid::ObstacleGrid(int n, std::span<const GridPos> blocked) : ObstacleGrid(n) {
  for (GridPos p : blocked) insert(p);
}

void ObstacleGrid::insert(GridPos p) {
  if (!in_bounds(p)) throw std::out_of_range("ObstacleGrid::insert: cell outside the grid");
  auto& cell = cells_[offset(p)];
  if (cell == 0) {
    cell = 1;
    ++count_;
  }
}

std::vector<GridPos> ObstacleGrid::cells() const {
  std::vector<GridPos> out;
  out.reserve(count_);
  for (int y = 0; y < n_; ++y)
    for (int x = 0; x < n_; ++x)
      if (blocked({x, y})) out.push_back({x, y});
  return out;
}

std::vector<GridPos> ObstacleGrid::free_cells() const {
  std::vector<GridPos> out;
  out.reserve(cells_.size() - count_);
  for (int y = 0; y < n_; ++y)
    for (int x = 0; x < n_; ++x)
      if (is_free({x, y})) out.push_back({x, y});
  return out;
}

void GridWorldConfig::validate() const {
  if (size < 2) throw std::invalid_argument("grid size must be at least 2");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
  if (switch_episode < 0) throw std::invalid_argument("switch_episode must be non-negative");
}

ObstacleGrid wall_layout(int n, WallPhase phase) {
  if (n < 2) throw std::invalid_argument("wall_layout: n must be at least 2");
  const int mid = n / 2;
  ObstacleGrid grid(n);
  for (int i = 0; i < n; ++i) {
    if (i == mid) continue;
    grid.insert(phase == WallPhase::Pre ? GridPos{mid, i} : GridPos{i, mid});
  }
  return grid;
}

namespace {

// Connected-component label per free cell (row-major), -1 for blocked cells.
std::vector<int> component_labels(const ObstacleGrid& grid) {
  const int n = grid.size();
  std::vector<int> label(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
  int next_label = 0;
  for (GridPos p : grid.free_cells()) {
    const auto idx = static_cast<std::size_t>(p.y * n + p.x);
    if (label[idx] >= 0) continue;
    const auto dist = bfs_distance_field(grid, p);
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (dist[i] >= 0) label[i] = next_label;
    ++next_label;
  }
  return label;
}

}  // namespace

EpisodeLayout reset_episode(const GridWorldConfig& config, int episode, Rng& rng) {
  config.validate();
  if (episode < 1) throw std::invalid_argument("reset_episode: episodes are numbered from 1");
  const int n = config.size;
  if (config.mode == EnvMode::Static) {
    return {{0, 0}, {n - 1, n - 1}, ObstacleGrid(n)};
  }

  ObstacleGrid obstacles =
      wall_layout(n, episode <= config.switch_episode ? WallPhase::Pre : WallPhase::Post);
  const auto free = obstacles.free_cells();
  const auto label = component_labels(obstacles);
  auto label_of = [&](GridPos p) { return label[static_cast<std::size_t>(p.y * n + p.x)]; };

  std::vector<int> component_size;
  for (GridPos p : free) {
    const auto l = static_cast<std::size_t>(label_of(p));
    if (component_size.size() <= l) component_size.resize(l + 1, 0);
    ++component_size[l];
  }
  bool any_pair = false;
  for (int s : component_size) any_pair = any_pair || s >= 2;
  if (!any_pair) throw std::runtime_error("reset_episode: no reachable start/goal pair exists");

  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  for (;;) {
    const GridPos start = free[pick(rng)];
    const GridPos goal = free[pick(rng)];
    if (start != goal && label_of(start) == label_of(goal)) {
      return {start, goal, std::move(obstacles)};
    }
  }
}

StepOutcome step(GridPos state, Action action, GridPos goal, const ObstacleGrid& obstacles, int steps_taken,
                 int max_steps) noexcept {
  StepOutcome out;
  const GridPos target = displaced(state, action);
  out.next_state = obstacles.is_free(target) ? target : state;
  out.done = out.next_state == goal;
  out.reward = out.done ? 1 : 0;
  out.truncated = !out.done && steps_taken + 1 >= max_steps;
  return out;
}

std::string render_layout(const ObstacleGrid& obstacles, std::optional<GridPos> start, std::optional<GridPos> goal) {
  const int n = obstacles.size();
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1));
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const GridPos p{x, y};
      char c = obstacles.blocked(p) ? '#' : '.';
      if (start && *start == p) c = 'S';
      if (goal && *goal == p) c = 'G';
      out.push_back(c);
    }
    out.push_back('\n');
  }
  return out;
}

GridWorld::GridWorld(GridWorldConfig config) : config_(config), rng_(derive_seed(config.seed, 0x656e76)) {
  config_.validate();
}

const EpisodeLayout& GridWorld::reset(int episode) {
  layout_ = reset_episode(config_, episode, rng_);
  state_ = layout_.start;
  steps_ = 0;
  finished_ = false;
  min_steps_ = bfs_min_steps(layout_.obstacles, layout_.start, layout_.goal).value();
  return layout_;
}

StepOutcome GridWorld::step(Action action) {
  if (finished_) throw std::logic_error("GridWorld::step called on a finished episode");
  const StepOutcome out = fastslow::step(state_, action, layout_.goal, layout_.obstacles, steps_, max_steps());
  state_ = out.next_state;
  ++steps_;
  finished_ = out.done || out.truncated;
  return out;
}

}  // namespace fastslow
