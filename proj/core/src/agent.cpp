#include "fastslow/agent.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fastslow {

std::string_view to_string(TrainTiming t) noexcept { return t == TrainTiming::EveryStep ? "step" : "episode"; }

std::optional<TrainTiming> parse_train_timing(std::string_view text) noexcept {
  if (text == "step") return TrainTiming::EveryStep;
  if (text == "episode") return TrainTiming::EpisodeEnd;
  return std::nullopt;
}

std::string_view to_string(ReplayWindow w) noexcept { return w == ReplayWindow::LastStep ? "step" : "episode"; }

std::optional<ReplayWindow> parse_replay_window(std::string_view text) noexcept {
  if (text == "step") return ReplayWindow::LastStep;
  if (text == "episode") return ReplayWindow::Episode;
  return std::nullopt;
}

void FastSlowConfig::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  if (branches < 1) throw std::invalid_argument("branches must be at least 1");
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (updates_per_step < 1) throw std::invalid_argument("updates per step must be at least 1");
}

Action select_action(const ActionProbs& probs, const VisitCounts::Counts& visits, double alpha, Rng& rng) {
  std::array<int, kNumActions> best{};
  int ties = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < kNumActions; ++a) {
    const auto i = static_cast<std::size_t>(a);
    const double score = probs[i] - alpha * std::sqrt(static_cast<double>(visits[i]));
    if (score > best_score) {
      best_score = score;
      ties = 0;
    }
    if (score == best_score) best[static_cast<std::size_t>(ties++)] = a;
  }
  if (ties == 1) return action_from_index(best[0]);
  const auto pick = std::uniform_int_distribution<int>(0, ties - 1)(rng);
  return action_from_index(best[static_cast<std::size_t>(pick)]);
}

std::vector<TrainingPair> build_replay_pairs(std::span<const StateAction> past, std::span<const StateAction> future,
                                             GridPos current, GridPos goal) {
  if (past.empty()) throw std::invalid_argument("build_replay_pairs: past trajectory is empty");
  std::vector<TrainingPair> pairs;
  pairs.reserve(past.size() + future.size());
  for (const auto& step : past) pairs.push_back({step.state, current, {index_of(step.action), 0}});
  for (const auto& step : future) pairs.push_back({step.state, goal, {index_of(step.action), 0}});
  return pairs;
}

FastSlowAgent::FastSlowAgent(FastSlowConfig config)
    : config_(config),
      policy_(MlpShape{}, derive_seed(config.seed, 1)),
      adam_(policy_, AdamOptions{.learning_rate = config.learning_rate}),
      rng_(derive_seed(config.seed, 2)) {
  config_.validate();
}

StepDecision FastSlowAgent::decide(GridPos state, GridPos goal) {
  StepDecision d;
  if (config_.use_fast) {
    const auto p = policy_.forward(state, goal).front();
    for (int a = 0; a < kNumActions; ++a) d.probs[static_cast<std::size_t>(a)] = p(a);
  } else {
    d.probs.fill(1.0 / kNumActions);
  }
  d.proposed = select_action(d.probs, memory_.visits.numvisits(state), config_.alpha, rng_);
  d.action = d.proposed;

  const std::uint64_t stream = derive_seed(config_.seed, 3, decisions_++);
  if (config_.use_slow) {
    d.plan = lookahead(memory_.overall, state, goal,
                       LookaheadParams{config_.branches, config_.depth, config_.lookahead_threads, config_.erase_loops}, stream);
    if (d.plan.found) {
      d.action = d.plan.trajectory.front().action;
      d.overridden = true;
    }
  }
  return d;
}

void FastSlowAgent::train(std::span<const StateAction> past, std::span<const StateAction> future, GridPos current,
                          GridPos goal) {
  last_replay_ = build_replay_pairs(past, future, current, goal);
  for (int i = 0; i < config_.updates_per_step; ++i) train_step(policy_, adam_, last_replay_);
}

EpisodeResult FastSlowAgent::run_episode(GridWorld& env, int episode) {
  const auto started = std::chrono::steady_clock::now();
  const EpisodeLayout& layout = env.reset(episode);
  memory_.begin_episode();
  last_replay_.clear();

  EpisodeResult result{episode, 0, false, env.min_steps(), layout.start, layout.goal, 0.0};
  const GridPos goal = layout.goal;
  std::vector<StateAction> past;
  std::vector<StateAction> last_future;
  past.reserve(static_cast<std::size_t>(env.max_steps()));
  GridPos current = env.state();

  while (!env.finished()) {
    const GridPos state = env.state();
    StepDecision d = decide(state, goal);
    const StepOutcome out = env.step(d.action);
    memory_.store(state, d.action, out.next_state);
    memory_.visits.record_visit(state, d.action);
    past.push_back({state, d.action});
    current = out.next_state;
    if (observer_) observer_(StepTrace{episode, state, &d, out});

    std::span<const StateAction> future;
    if (d.plan.found) {
      last_future = std::move(d.plan.trajectory);
      future = last_future;
    }
    // The policy is never queried when the fast path is disabled.
    if (config_.use_fast && config_.train_timing == TrainTiming::EveryStep) {
      std::span<const StateAction> window = past;
      if (config_.replay_window == ReplayWindow::LastStep) window = window.last(1);
      train(window, future, current, goal);
    }
    if (out.done) result.solved = true;
  }
  // A single end-of-episode update always replays the whole episode.
  if (config_.use_fast && config_.train_timing == TrainTiming::EpisodeEnd) train(past, last_future, current, goal);

  result.steps = env.steps_taken();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace fastslow
