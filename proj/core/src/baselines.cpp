#include "fastslow/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace fastslow {

double QTable::value(GridPos s, Action a) const noexcept {
  return values(s)[static_cast<std::size_t>(index_of(a))];
}

QTable::Values QTable::values(GridPos s) const noexcept {
  const auto it = table_.find(s);
  return it == table_.end() ? Values{} : it->second;
}

double QTable::max_value(GridPos s) const noexcept {
  const auto v = values(s);
  return *std::max_element(v.begin(), v.end());
}

double QTable::td_update(GridPos s, Action a, double reward, GridPos s2) {
  const double target = reward + gamma_ * max_value(s2);
  double& q = table_[s][static_cast<std::size_t>(index_of(a))];
  const double delta = target - q;
  // With a unit learning rate the target is stored directly so the update is exact.
  q = learning_rate_ == 1.0 ? target : q + learning_rate_ * delta;
  return delta;
}

Action q_select(const QTable& q, GridPos s, int episode, int random_episodes, Rng& rng) {
  if (episode <= random_episodes) {
    return action_from_index(std::uniform_int_distribution<int>(0, kNumActions - 1)(rng));
  }
  const auto v = q.values(s);
  const double best = *std::max_element(v.begin(), v.end());
  std::array<int, kNumActions> ties{};
  int n = 0;
  for (int a = 0; a < kNumActions; ++a)
    if (v[static_cast<std::size_t>(a)] == best) ties[static_cast<std::size_t>(n++)] = a;
  if (n == 1) return action_from_index(ties[0]);
  return action_from_index(ties[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n - 1)(rng))]);
}

QLearningAgent::QLearningAgent(QLearningConfig config)
    : config_(config), table_(config.gamma, config.learning_rate), rng_(derive_seed(config.seed, 4)) {
  if (config_.random_episodes < 0) throw std::invalid_argument("random_episodes must be non-negative");
  if (!(config_.gamma >= 0.0 && config_.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(config_.learning_rate > 0.0)) throw std::invalid_argument("Q learning rate must be positive");
}

EpisodeResult QLearningAgent::run_episode(GridWorld& env, int episode) {
  const auto started = std::chrono::steady_clock::now();
  const EpisodeLayout& layout = env.reset(episode);
  EpisodeResult result{episode, 0, false, env.min_steps(), layout.start, layout.goal, 0.0};
  while (!env.finished()) {
    const GridPos s = env.state();
    const Action a = q_select(table_, s, episode, config_.random_episodes, rng_);
    const StepOutcome out = env.step(a);
    table_.td_update(s, a, out.reward, out.next_state);
    if (out.done) result.solved = true;
  }
  result.steps = env.steps_taken();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string_view to_string(AblationVariant v) noexcept {
  switch (v) {
    case AblationVariant::NoFast:
      return "nofast";
    case AblationVariant::NoSlow:
      return "noslow";
    case AblationVariant::Neither:
      return "neither";
  }
  return "?";
}

FastSlowConfig ablation_config(AblationVariant variant, FastSlowConfig base) {
  base.use_fast = variant == AblationVariant::NoSlow;
  base.use_slow = variant == AblationVariant::NoFast;
  return base;
}

std::unique_ptr<FastSlowAgent> ablation_agent(AblationVariant variant, const FastSlowConfig& base) {
  return std::make_unique<FastSlowAgent>(ablation_config(variant, base));
}

}  // namespace fastslow
