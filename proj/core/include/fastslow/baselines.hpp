#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "fastslow/agent.hpp"
#include "fastslow/episode.hpp"

namespace fastslow {

/// Tabular action values; entries never written read as 0.
class QTable {
 public:
  using Values = std::array<double, kNumActions>;

  explicit QTable(double gamma = 0.99, double learning_rate = 1.0) : gamma_(gamma), learning_rate_(learning_rate) {}

  double value(GridPos s, Action a) const noexcept;
  Values values(GridPos s) const noexcept;
  double max_value(GridPos s) const noexcept;

  /// Q(s,a) += lr * (r + gamma * max_a' Q(s2,a') - Q(s,a)). Returns the TD error.
  double td_update(GridPos s, Action a, double reward, GridPos s2);

  double gamma() const noexcept { return gamma_; }
  double learning_rate() const noexcept { return learning_rate_; }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  double gamma_;
  double learning_rate_;
  std::unordered_map<GridPos, Values> table_;
};

/// Uniform random action for episodes up to `random_episodes`, greedy after
/// (uniform among maximal values).
Action q_select(const QTable& q, GridPos s, int episode, int random_episodes, Rng& rng);

struct QLearningConfig {
  double gamma = 0.99;
  double learning_rate = 1.0;
  int random_episodes = 75;
  std::uint64_t seed = 0;
};

class QLearningAgent final : public Agent {
 public:
  explicit QLearningAgent(QLearningConfig config);

  std::string_view name() const noexcept override { return "qlearn"; }
  EpisodeResult run_episode(GridWorld& env, int episode) override;

  const QTable& table() const noexcept { return table_; }

 private:
  QLearningConfig config_;
  QTable table_;
  Rng rng_;
};

enum class AblationVariant { NoFast, NoSlow, Neither };

std::string_view to_string(AblationVariant v) noexcept;

/// `base` with the fast and/or slow mechanism switched off.
FastSlowConfig ablation_config(AblationVariant variant, FastSlowConfig base);
std::unique_ptr<FastSlowAgent> ablation_agent(AblationVariant variant, const FastSlowConfig& base);

}  // namespace fastslow
