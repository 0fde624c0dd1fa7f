#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastslow/agent.hpp"
#include "fastslow/episode.hpp"

namespace fastslow {

enum class AgentKind { FastSlow, QLearn, NoFast, NoSlow, Neither };

std::string_view to_string(AgentKind k) noexcept;
std::optional<AgentKind> parse_agent_kind(std::string_view text) noexcept;

struct ExperimentConfig {
  EnvMode env = EnvMode::Dynamic;
  int size = 10;
  int episodes = 100;
  int switch_episode = 50;
  AgentKind agent = AgentKind::FastSlow;
  double alpha = 1.0;
  int branches = 100;
  int depth = 20;
  TrainTiming train_timing = TrainTiming::EveryStep;
  ReplayWindow replay_window = ReplayWindow::LastStep;
  int updates = 2;
  bool erase_loops = true;
  /// Random-exploration episodes for Q-learning.
  int k = 75;
  int seeds = 5;
  std::uint64_t seed_base = 1;
  /// Concurrent seed runs; 0 uses the hardware concurrency.
  unsigned jobs = 0;
  std::filesystem::path out;

  /// Throws std::invalid_argument when any field is out of range.
  void validate() const;
  std::vector<std::uint64_t> seed_list() const;
  /// Fast & Slow settings carried by this config, with the given agent seed.
  FastSlowConfig fastslow_config(std::uint64_t agent_seed) const;
};

/// Sets one field by its option name (e.g. "branches", "train-timing").
/// Throws std::invalid_argument for unknown keys or unparsable values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat `key=value` lines; blank lines and '#' comments are ignored.
std::vector<std::pair<std::string, std::string>> read_settings(std::istream& in);
void apply_settings(ExperimentConfig& config, std::span<const std::pair<std::string, std::string>> settings);

struct EpisodeRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// First and second halves of `n` episodes. A single episode forms both halves.
std::pair<EpisodeRange, EpisodeRange> halves(std::size_t n) noexcept;

/// Percentage of solved episodes in `range`.
double solve_rate(std::span<const EpisodeResult> results, EpisodeRange range);
/// Sum of (steps - min_steps) over `range`.
long steps_above_minimum(std::span<const EpisodeResult> results, EpisodeRange range);

struct MetricsSummary {
  double solve_first = 0.0;
  double solve_last = 0.0;
  double solve_total = 0.0;
  double steps_first = 0.0;
  double steps_last = 0.0;
  double steps_total = 0.0;
};

MetricsSummary summarize(std::span<const EpisodeResult> results);
MetricsSummary mean_summary(std::span<const MetricsSummary> summaries);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EpisodeResult> episodes;
  MetricsSummary summary;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;
  MetricsSummary mean;
};

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, std::uint64_t seed);
GridWorldConfig make_env_config(const ExperimentConfig& config, std::uint64_t seed);

/// Plays every seed with a fresh agent (in parallel up to `jobs`). When
/// `config.out` is set, writes the CSV outputs there.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// `seed,episode,steps,min_steps,solved,start_x,start_y,goal_x,goal_y`
void write_episodes_csv(std::ostream& out, std::span<const SeedRun> runs);
/// `metric,first50,last50,total`
void write_summary_csv(std::ostream& out, const MetricsSummary& summary);

/// Writes episodes.csv, summary.csv, summary_by_seed.csv and timing.csv into
/// `dir`. Files are staged and renamed only once all of them are written.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// `key=v1,v2,...` per line; `lo..hi` expands to every integer in between.
std::vector<SweepAxis> read_grid(std::istream& in);

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> settings;
  MetricsSummary mean;
};

/// Cross product of the axes over `base`, all points sharing the base seeds.
/// When `base.out` is set, also writes sweep.csv there.
std::vector<SweepPoint> sweep(const ExperimentConfig& base, std::span<const SweepAxis> axes);

}  // namespace fastslow
