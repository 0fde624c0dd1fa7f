#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fastslow/harness.hpp"
#include "fastslow/prediction_bench.hpp"

namespace {

using fastslow::ExperimentConfig;

// Options shared by `run` and `sweep`. Values stay optional so that only flags
// given on the command line override the config file.
struct RunFlags {
  std::optional<std::string> config_file;
  std::optional<std::string> env, agent, train_timing, replay_window, erase_loops, out;
  std::optional<int> size, episodes, seeds, branches, depth, updates, k, switch_episode;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed_base;
  std::optional<unsigned> jobs;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--config", f.config_file, "key=value config file (CLI flags take precedence)");
  cmd.add_option("--env", f.env, "Environment")->check(CLI::IsMember({"static", "dynamic"}));
  cmd.add_option("--size", f.size, "Grid size n");
  cmd.add_option("--agent", f.agent, "Agent")
      ->check(CLI::IsMember({"fastslow", "qlearn", "nofast", "noslow", "neither"}));
  cmd.add_option("--episodes", f.episodes, "Episodes per seed");
  cmd.add_option("--seeds", f.seeds, "Number of seeds");
  cmd.add_option("--seed-base", f.seed_base, "First seed");
  cmd.add_option("--alpha", f.alpha, "Exploration constant");
  cmd.add_option("--branches", f.branches, "Lookahead branches");
  cmd.add_option("--depth", f.depth, "Lookahead depth");
  cmd.add_option("--train-timing", f.train_timing, "When the policy trains")->check(CLI::IsMember({"step", "episode"}));
  cmd.add_option("--replay-window", f.replay_window, "Past steps replayed per update")
      ->check(CLI::IsMember({"step", "episode"}));
  cmd.add_option("--updates", f.updates, "Adam updates per replay batch");
  cmd.add_option("--erase-loops", f.erase_loops, "Loop-erase lookahead walks")->check(CLI::IsMember({"on", "off"}));
  cmd.add_option("--k", f.k, "Random-exploration episodes for qlearn");
  cmd.add_option("--switch-episode", f.switch_episode, "Last episode with the pre-switch wall");
  cmd.add_option("--jobs", f.jobs, "Seeds run concurrently (0 = all cores)");
  cmd.add_option("--out", f.out, "Output directory");
}

ExperimentConfig resolve(const RunFlags& f) {
  ExperimentConfig cfg;
  if (f.config_file) {
    std::ifstream in(*f.config_file);
    if (!in) throw std::invalid_argument("cannot open config file " + *f.config_file);
    const auto settings = fastslow::read_settings(in);
    fastslow::apply_settings(cfg, settings);
  }
  auto set = [&](const char* key, const auto& value) {
    if (!value) return;
    std::ostringstream text;
    text << *value;
    fastslow::apply_setting(cfg, key, text.str());
  };
  set("env", f.env);
  set("agent", f.agent);
  set("train-timing", f.train_timing);
  set("out", f.out);
  set("size", f.size);
  set("episodes", f.episodes);
  set("seeds", f.seeds);
  set("seed-base", f.seed_base);
  set("branches", f.branches);
  set("depth", f.depth);
  set("replay-window", f.replay_window);
  set("updates", f.updates);
  set("erase-loops", f.erase_loops);
  set("k", f.k);
  set("switch-episode", f.switch_episode);
  set("jobs", f.jobs);
  if (f.alpha) cfg.alpha = *f.alpha;
  cfg.validate();
  return cfg;
}

void print_summary(std::ostream& out, const fastslow::MetricsSummary& s) {
  out << std::fixed << std::setprecision(1);
  out << "                     first-half  last-half     total\n";
  out << "solve rate (%)       " << std::setw(10) << s.solve_first << ' ' << std::setw(10) << s.solve_last << ' '
      << std::setw(9) << s.solve_total << '\n';
  out << "steps above minimum  " << std::setw(10) << s.steps_first << ' ' << std::setw(10) << s.steps_last << ' '
      << std::setw(9) << s.steps_total << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast & Slow grid-world experiments"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run one experiment over several seeds");
  add_run_flags(*run, run_flags);

  RunFlags sweep_flags;
  std::string grid_file;
  auto* sweep = app.add_subcommand("sweep", "Run the cross product of a parameter grid");
  sweep->add_option("--grid", grid_file, "Grid file with key=v1,v2,... lines")->required();
  add_run_flags(*sweep, sweep_flags);

  std::string task = "action";
  int pred_size = 10;
  std::uint64_t pred_seed = 0;
  int pred_epochs = 0;
  std::string pred_out;
  auto* predict = app.add_subcommand("predict", "Next-action vs next-state prediction benchmark");
  predict->add_option("--task", task, "Prediction target")->check(CLI::IsMember({"action", "state"}));
  predict->add_option("--size", pred_size, "Grid size")->check(CLI::Range(2, 1000));
  predict->add_option("--seed", pred_seed, "Seed");
  predict->add_option("--epochs", pred_epochs, "Epochs per phase (0 = task default)");
  predict->add_option("--out", pred_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_flags);
      const auto result = fastslow::run_experiment(cfg);
      print_summary(std::cout, result.mean);
      if (!cfg.out.empty()) std::cout << "wrote " << cfg.out.string() << '\n';
    } else if (*sweep) {
      const auto cfg = resolve(sweep_flags);
      std::ifstream in(grid_file);
      if (!in) throw std::invalid_argument("cannot open grid file " + grid_file);
      const auto axes = fastslow::read_grid(in);
      for (const auto& point : fastslow::sweep(cfg, axes)) {
        for (const auto& [k, v] : point.settings) std::cout << k << '=' << v << ' ';
        std::cout << "solve=" << point.mean.solve_total << " steps_above_min=" << point.mean.steps_total << '\n';
      }
    } else if (*predict) {
      const auto parsed = fastslow::parse_prediction_task(task);
      fastslow::PredictionOptions opts;
      opts.size = pred_size;
      opts.seed = pred_seed;
      opts.epochs_per_phase = pred_epochs;
      const auto series = fastslow::run_prediction_experiment(*parsed, opts);
      if (pred_out.empty()) {
        fastslow::write_csv(std::cout, series);
      } else {
        std::filesystem::create_directories(pred_out);
        const auto path = std::filesystem::path(pred_out) / ("predict_" + task + "_" + std::to_string(pred_size) + ".csv");
        std::ofstream f(path);
        fastslow::write_csv(f, series);
        std::cout << "wrote " << path.string() << '\n';
      }
      for (int phase : {1, 2}) {
        const auto e = series.epochs_to_reach(phase, 0.99);
        std::cout << "phase " << phase << ": epochs to 0.99 = " << (e ? std::to_string(*e) : std::string("not reached"))
                  << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
