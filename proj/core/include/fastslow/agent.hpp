#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fastslow/episode.hpp"
#include "fastslow/memory.hpp"
#include "fastslow/neural.hpp"

namespace fastslow {

enum class TrainTiming { EveryStep, EpisodeEnd };

std::string_view to_string(TrainTiming t) noexcept;
std::optional<TrainTiming> parse_train_timing(std::string_view text) noexcept;

/// Which visited steps feed the past half of each replay update: only the step
/// just taken, or every step since the episode began.
enum class ReplayWindow { LastStep, Episode };

std::string_view to_string(ReplayWindow w) noexcept;
std::optional<ReplayWindow> parse_replay_window(std::string_view text) noexcept;

struct FastSlowConfig {
  /// Weight of the visit-count penalty in action selection.
  double alpha = 1.0;
  int branches = 100;
  int depth = 20;
  TrainTiming train_timing = TrainTiming::EveryStep;
  bool use_fast = true;
  bool use_slow = true;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  unsigned lookahead_threads = 1;
  ReplayWindow replay_window = ReplayWindow::LastStep;
  /// Adam updates applied to each replay batch.
  int updates_per_step = 2;
  bool erase_loops = true;

  void validate() const;
};

enum class TrajectoryKind { Past, Future };

struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::Past;
  std::vector<StateAction> steps;
};

using ActionProbs = std::array<double, kNumActions>;

/// argmax_a p(a) - alpha * sqrt(visits(a)), ties broken uniformly at random.
Action select_action(const ActionProbs& probs, const VisitCounts::Counts& visits, double alpha, Rng& rng);

/// Hindsight pairs: every past step is labelled with `current` as its goal and
/// every future (imagined) step with `goal`. An empty `future` adds nothing.
/// Throws std::invalid_argument if `past` is empty.
std::vector<TrainingPair> build_replay_pairs(std::span<const StateAction> past, std::span<const StateAction> future,
                                             GridPos current, GridPos goal);

struct StepDecision {
  Action action = Action::Up;
  /// Action chosen by the explore-exploit rule before any override.
  Action proposed = Action::Up;
  ActionProbs probs{};
  LookaheadResult plan;
  bool overridden = false;
};

struct StepTrace {
  int episode = 0;
  GridPos state;
  const StepDecision* decision = nullptr;
  StepOutcome outcome;
};

/// Goal-conditioned policy network plus transition-memory lookahead.
class FastSlowAgent final : public Agent {
 public:
  explicit FastSlowAgent(FastSlowConfig config);

  std::string_view name() const noexcept override { return "fastslow"; }

  /// One decision: policy probabilities (uniform without the fast path), the
  /// count-penalised choice, then the lookahead override when a plan exists.
  StepDecision decide(GridPos state, GridPos goal);

  EpisodeResult run_episode(GridWorld& env, int episode) override;

  const FastSlowConfig& config() const noexcept { return config_; }
  const MemorySystem& memory() const noexcept { return memory_; }
  MemorySystem& memory() noexcept { return memory_; }
  const Mlp& policy() const noexcept { return policy_; }
  /// Called after every environment step of run_episode.
  void set_observer(std::function<void(const StepTrace&)> observer) { observer_ = std::move(observer); }

  /// Training pairs used by the most recent update (empty if none ran).
  std::span<const TrainingPair> last_replay() const noexcept { return last_replay_; }

 private:
  void train(std::span<const StateAction> past, std::span<const StateAction> future, GridPos current, GridPos goal);

  FastSlowConfig config_;
  Mlp policy_;
  Adam adam_;
  MemorySystem memory_;
  Rng rng_;
  std::uint64_t decisions_ = 0;
  std::vector<TrainingPair> last_replay_;
  std::function<void(const StepTrace&)> observer_;
};

}  // namespace fastslow
