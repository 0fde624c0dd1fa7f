#pragma once

#include <string_view>

#include "fastslow/grid_world.hpp"

namespace fastslow {

struct EpisodeResult {
  int episode = 0;
  /// Steps taken; equals the step budget when the goal was not reached.
  int steps = 0;
  bool solved = false;
  int min_steps = 0;
  GridPos start;
  GridPos goal;
  /// Wall-clock duration, informational only.
  double seconds = 0.0;
};

/// Anything that can play episodes of the grid world while learning online.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string_view name() const noexcept = 0;
  /// Resets `env` for `episode` (1-based) and plays it to completion.
  virtual EpisodeResult run_episode(GridWorld& env, int episode) = 0;
};

}  // namespace fastslow
