#include "fastslow/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fastslow/baselines.hpp"

namespace fastslow {

std::string_view to_string(AgentKind k) noexcept {
  switch (k) {
    case AgentKind::FastSlow:
      return "fastslow";
    case AgentKind::QLearn:
      return "qlearn";
    case AgentKind::NoFast:
      return "nofast";
    case AgentKind::NoSlow:
      return "noslow";
    case AgentKind::Neither:
      return "neither";
  }
  return "?";
}

std::optional<AgentKind> parse_agent_kind(std::string_view text) noexcept {
  for (AgentKind k : {AgentKind::FastSlow, AgentKind::QLearn, AgentKind::NoFast, AgentKind::NoSlow, AgentKind::Neither}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  GridWorldConfig{size, env, switch_episode, 0, 0}.validate();
  if (episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  if (seeds < 1) throw std::invalid_argument("seeds must be at least 1");
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  fastslow_config(0).validate();
}

FastSlowConfig ExperimentConfig::fastslow_config(std::uint64_t agent_seed) const {
  FastSlowConfig fs;
  fs.alpha = alpha;
  fs.branches = branches;
  fs.depth = depth;
  fs.train_timing = train_timing;
  fs.seed = agent_seed;
  fs.replay_window = replay_window;
  fs.updates_per_step = updates;
  fs.erase_loops = erase_loops;
  return fs;
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < seeds; ++i) out.push_back(seed_base + static_cast<std::uint64_t>(i));
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  // from_chars for double is not available on every toolchain we target.
  std::istringstream in{std::string(value)};
  double out = 0.0;
  if (!(in >> out) || !(in >> std::ws).eof()) bad_value(key, value);
  return out;
}

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  if (key == "env") {
    const auto m = parse_env_mode(value);
    if (!m) bad_value(key, value);
    config.env = *m;
  } else if (key == "size") {
    config.size = parse_number<int>(key, value);
  } else if (key == "episodes") {
    config.episodes = parse_number<int>(key, value);
  } else if (key == "switch-episode") {
    config.switch_episode = parse_number<int>(key, value);
  } else if (key == "agent") {
    const auto a = parse_agent_kind(value);
    if (!a) bad_value(key, value);
    config.agent = *a;
  } else if (key == "alpha") {
    config.alpha = parse_double(key, value);
  } else if (key == "branches") {
    config.branches = parse_number<int>(key, value);
  } else if (key == "depth") {
    config.depth = parse_number<int>(key, value);
  } else if (key == "train-timing") {
    const auto t = parse_train_timing(value);
    if (!t) bad_value(key, value);
    config.train_timing = *t;
  } else if (key == "replay-window") {
    const auto w = parse_replay_window(value);
    if (!w) bad_value(key, value);
    config.replay_window = *w;
  } else if (key == "updates") {
    config.updates = parse_number<int>(key, value);
  } else if (key == "erase-loops") {
    if (value == "true" || value == "on" || value == "1") {
      config.erase_loops = true;
    } else if (value == "false" || value == "off" || value == "0") {
      config.erase_loops = false;
    } else {
      bad_value(key, value);
    }
  } else if (key == "k") {
    config.k = parse_number<int>(key, value);
  } else if (key == "seeds") {
    config.seeds = parse_number<int>(key, value);
  } else if (key == "seed-base") {
    config.seed_base = parse_number<std::uint64_t>(key, value);
  } else if (key == "jobs") {
    config.jobs = parse_number<unsigned>(key, value);
  } else if (key == "out") {
    config.out = std::string(value);
  } else {
    throw std::invalid_argument("unknown setting '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> read_settings(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1)));
  }
  return out;
}

void apply_settings(ExperimentConfig& config, std::span<const std::pair<std::string, std::string>> settings) {
  for (const auto& [k, v] : settings) apply_setting(config, k, v);
}

std::pair<EpisodeRange, EpisodeRange> halves(std::size_t n) noexcept {
  if (n <= 1) return {{0, n}, {0, n}};
  return {{0, n / 2}, {n / 2, n}};
}

double solve_rate(std::span<const EpisodeResult> results, EpisodeRange range) {
  if (range.end > results.size() || range.begin >= range.end) {
    throw std::out_of_range("solve_rate: empty or out-of-range episode range");
  }
  const auto solved = std::count_if(results.begin() + static_cast<std::ptrdiff_t>(range.begin),
                                    results.begin() + static_cast<std::ptrdiff_t>(range.end),
                                    [](const EpisodeResult& r) { return r.solved; });
  return 100.0 * static_cast<double>(solved) / static_cast<double>(range.end - range.begin);
}

long steps_above_minimum(std::span<const EpisodeResult> results, EpisodeRange range) {
  if (range.end > results.size() || range.begin > range.end) {
    throw std::out_of_range("steps_above_minimum: out-of-range episode range");
  }
  long total = 0;
  for (std::size_t i = range.begin; i < range.end; ++i) total += results[i].steps - results[i].min_steps;
  return total;
}

MetricsSummary summarize(std::span<const EpisodeResult> results) {
  if (results.empty()) throw std::invalid_argument("summarize: no episodes");
  const auto [first, last] = halves(results.size());
  const EpisodeRange all{0, results.size()};
  return {solve_rate(results, first),
          solve_rate(results, last),
          solve_rate(results, all),
          static_cast<double>(steps_above_minimum(results, first)),
          static_cast<double>(steps_above_minimum(results, last)),
          static_cast<double>(steps_above_minimum(results, all))};
}

MetricsSummary mean_summary(std::span<const MetricsSummary> summaries) {
  MetricsSummary m;
  if (summaries.empty()) return m;
  for (const auto& s : summaries) {
    m.solve_first += s.solve_first;
    m.solve_last += s.solve_last;
    m.solve_total += s.solve_total;
    m.steps_first += s.steps_first;
    m.steps_last += s.steps_last;
    m.steps_total += s.steps_total;
  }
  const double n = static_cast<double>(summaries.size());
  m.solve_first /= n;
  m.solve_last /= n;
  m.solve_total /= n;
  m.steps_first /= n;
  m.steps_last /= n;
  m.steps_total /= n;
  return m;
}

GridWorldConfig make_env_config(const ExperimentConfig& config, std::uint64_t seed) {
  return GridWorldConfig{config.size, config.env, config.switch_episode, 0, derive_seed(seed, 100)};
}

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, std::uint64_t seed) {
  const std::uint64_t agent_seed = derive_seed(seed, 200);
  if (config.agent == AgentKind::QLearn) {
    return std::make_unique<QLearningAgent>(QLearningConfig{0.99, 1.0, config.k, agent_seed});
  }
  const FastSlowConfig fs = config.fastslow_config(agent_seed);
  switch (config.agent) {
    case AgentKind::NoFast:
      return ablation_agent(AblationVariant::NoFast, fs);
    case AgentKind::NoSlow:
      return ablation_agent(AblationVariant::NoSlow, fs);
    case AgentKind::Neither:
      return ablation_agent(AblationVariant::Neither, fs);
    default:
      return std::make_unique<FastSlowAgent>(fs);
  }
}

namespace {

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedRun run;
  run.seed = seed;
  GridWorld env(make_env_config(config, seed));
  auto agent = make_agent(config, seed);
  run.episodes.reserve(static_cast<std::size_t>(config.episodes));
  for (int e = 1; e <= config.episodes; ++e) run.episodes.push_back(agent->run_episode(env, e));
  run.summary = summarize(run.episodes);
  return run;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  const auto seeds = config.seed_list();
  result.runs.resize(seeds.size());

  const unsigned jobs = std::max(1U, config.jobs > 0 ? config.jobs : std::thread::hardware_concurrency());
  for (std::size_t begin = 0; begin < seeds.size(); begin += jobs) {
    const std::size_t end = std::min(seeds.size(), begin + jobs);
    if (end - begin == 1) {
      result.runs[begin] = run_seed(config, seeds[begin]);
      continue;
    }
    std::vector<std::future<SeedRun>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, run_seed, std::cref(config), seeds[i]));
    }
    for (std::size_t i = begin; i < end; ++i) result.runs[i] = pending[i - begin].get();
  }

  std::vector<MetricsSummary> summaries;
  for (const auto& r : result.runs) summaries.push_back(r.summary);
  result.mean = mean_summary(summaries);

  if (!config.out.empty()) write_outputs(result, config.out);
  return result;
}

void write_episodes_csv(std::ostream& out, std::span<const SeedRun> runs) {
  out << "seed,episode,steps,min_steps,solved,start_x,start_y,goal_x,goal_y\n";
  for (const auto& run : runs) {
    for (const auto& e : run.episodes) {
      out << run.seed << ',' << e.episode << ',' << e.steps << ',' << e.min_steps << ',' << (e.solved ? 1 : 0) << ','
          << e.start.x << ',' << e.start.y << ',' << e.goal.x << ',' << e.goal.y << '\n';
    }
  }
}

namespace {

void write_metric_rows(std::ostream& out, std::string_view prefix, const MetricsSummary& s) {
  out << prefix << "solve_rate," << s.solve_first << ',' << s.solve_last << ',' << s.solve_total << '\n';
  out << prefix << "steps_above_minimum," << s.steps_first << ',' << s.steps_last << ',' << s.steps_total << '\n';
}

}  // namespace

void write_summary_csv(std::ostream& out, const MetricsSummary& summary) {
  out << "metric,first50,last50,total\n";
  write_metric_rows(out, "", summary);
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::vector<std::string> names{"episodes.csv", "summary.csv", "summary_by_seed.csv", "timing.csv"};
  std::vector<fs::path> staged;
  auto stage = [&](const std::string& name) -> std::ofstream {
    staged.push_back(dir / (name + ".tmp"));
    std::ofstream f(staged.back());
    if (!f) throw std::runtime_error("cannot write " + staged.back().string());
    return f;
  };

  try {
    {
      auto f = stage(names[0]);
      write_episodes_csv(f, result.runs);
    }
    {
      auto f = stage(names[1]);
      write_summary_csv(f, result.mean);
    }
    {
      auto f = stage(names[2]);
      f << "seed,metric,first50,last50,total\n";
      for (const auto& run : result.runs) write_metric_rows(f, std::to_string(run.seed) + ",", run.summary);
    }
    {
      auto f = stage(names[3]);
      f << "seed,episode,seconds\n";
      for (const auto& run : result.runs)
        for (const auto& e : run.episodes) f << run.seed << ',' << e.episode << ',' << e.seconds << '\n';
    }
  } catch (...) {
    for (const auto& path : staged) fs::remove(path);
    throw;
  }
  for (std::size_t i = 0; i < staged.size(); ++i) fs::rename(staged[i], dir / names[i]);
}

std::vector<SweepAxis> read_grid(std::istream& in) {
  std::vector<SweepAxis> axes;
  for (const auto& [key, list] : read_settings(in)) {
    SweepAxis axis{key, {}};
    std::istringstream items(list);
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      if (const auto dots = item.find(".."); dots != std::string::npos) {
        const int lo = parse_number<int>(key, std::string_view(item).substr(0, dots));
        const int hi = parse_number<int>(key, std::string_view(item).substr(dots + 2));
        if (hi < lo) bad_value(key, item);
        for (int v = lo; v <= hi; ++v) axis.values.push_back(std::to_string(v));
      } else {
        axis.values.push_back(item);
      }
    }
    if (axis.values.empty()) bad_value(key, list);
    axes.push_back(std::move(axis));
  }
  return axes;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& base, std::span<const SweepAxis> axes) {
  // Expand and validate every point before running any of them.
  std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        auto q = p;
        q.emplace_back(axis.key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  std::vector<ExperimentConfig> configs;
  for (const auto& p : points) {
    ExperimentConfig c = base;
    apply_settings(c, p);
    c.out.clear();
    c.validate();
    configs.push_back(std::move(c));
  }

  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) out.push_back({points[i], run_experiment(configs[i]).mean});

  if (!base.out.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(base.out);
    const auto tmp = base.out / "sweep.csv.tmp";
    {
      std::ofstream f(tmp);
      if (!f) throw std::runtime_error("cannot write " + tmp.string());
      for (const auto& axis : axes) f << axis.key << ',';
      f << "solve_first50,solve_last50,solve_total,steps_first50,steps_last50,steps_total\n";
      for (const auto& p : out) {
        for (const auto& setting : p.settings) f << setting.second << ',';
        f << p.mean.solve_first << ',' << p.mean.solve_last << ',' << p.mean.solve_total << ',' << p.mean.steps_first
          << ',' << p.mean.steps_last << ',' << p.mean.steps_total << '\n';
      }
    }
    fs::rename(tmp, base.out / "sweep.csv");
  }
  return out;
}

}  // namespace fastslow
