#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fastslow/agent.hpp"
#include "fastslow/grid_world.hpp"
#include "fastslow/memory.hpp"
#include "fastslow/neural.hpp"

using namespace fastslow;

namespace {

// A bank filled by a long random walk on the 10x10 wall layout, roughly what
// the agent has seen after a few dozen episodes.
MemoryBank explored_bank(int steps) {
  std::mt19937_64 rng(3);
  const auto wall = wall_layout(10, WallPhase::Pre);
  const auto free = wall.free_cells();
  MemoryBank bank;
  GridPos s = free.front();
  for (int t = 0; t < steps; ++t) {
    const auto a = action_from_index(static_cast<int>(rng() % 4));
    const auto out = step(s, a, {-1, -1}, wall, 0, 1 << 30);
    bank.store(s, a, out.next_state);
    s = out.next_state;
  }
  return bank;
}

void BM_Lookahead(benchmark::State& state) {
  const auto bank = explored_bank(5000);
  const LookaheadParams params{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1, true};
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lookahead(bank, {0, 0}, {9, 9}, params, ++stream));
  }
}
BENCHMARK(BM_Lookahead)->Args({10, 20})->Args({100, 20})->Args({200, 20})->Args({100, 50});

void BM_TrainStep(benchmark::State& state) {
  Mlp net(MlpShape{}, 1);
  Adam adam(net);
  std::mt19937_64 rng(5);
  std::vector<TrainingPair> batch;
  for (int i = 0; i < state.range(0); ++i) {
    const GridPos s{static_cast<int>(rng() % 10), static_cast<int>(rng() % 10)};
    const GridPos g{static_cast<int>(rng() % 10), static_cast<int>(rng() % 10)};
    batch.push_back({s, g, {static_cast<int>(rng() % 4), 0}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(train_step(net, adam, batch));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(32)->Arg(100);

void BM_StaticEpisodes(benchmark::State& state) {
  for (auto _ : state) {
    FastSlowAgent agent(FastSlowConfig{.seed = 1});
    GridWorld env(GridWorldConfig{.size = 10, .mode = EnvMode::Static, .seed = 1});
    for (int e = 1; e <= state.range(0); ++e) benchmark::DoNotOptimize(agent.run_episode(env, e));
  }
}
BENCHMARK(BM_StaticEpisodes)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
