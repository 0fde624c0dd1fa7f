#include "fastslow/memory.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace fastslow {

void MemoryBank::store(GridPos state, Action action, GridPos next_state) {
  auto& slot = table_[state][static_cast<std::size_t>(index_of(action))];
  if (!slot) ++transitions_;
  slot = next_state;
}

std::vector<std::pair<Action, GridPos>> MemoryBank::lookup(GridPos state) const {
  std::vector<std::pair<Action, GridPos>> out;
  if (const Slots* slots = find(state)) {
    for (Action a : kAllActions) {
      if (const auto& next = (*slots)[static_cast<std::size_t>(index_of(a))]) out.emplace_back(a, *next);
    }
  }
  return out;
}

const MemoryBank::Slots* MemoryBank::find(GridPos state) const noexcept {
  const auto it = table_.find(state);
  return it == table_.end() ? nullptr : &it->second;
}

void MemoryBank::clear() noexcept {
  table_.clear();
  transitions_ = 0;
}

std::vector<TransitionRecord> MemoryBank::records() const {
  std::vector<TransitionRecord> out;
  out.reserve(transitions_);
  for (const auto& [state, slots] : table_) {
    for (Action a : kAllActions) {
      if (const auto& next = slots[static_cast<std::size_t>(index_of(a))]) out.push_back({state, a, *next});
    }
  }
  std::sort(out.begin(), out.end(), [](const TransitionRecord& l, const TransitionRecord& r) {
    if (l.state.y != r.state.y) return l.state.y < r.state.y;
    if (l.state.x != r.state.x) return l.state.x < r.state.x;
    return index_of(l.action) < index_of(r.action);
  });
  return out;
}

void MemoryBank::write_text(std::ostream& out) const {
  for (const auto& t : records()) {
    out << t.state.x << ',' << t.state.y << ',' << to_string(t.action) << ',' << t.next_state.x << ','
        << t.next_state.y << '\n';
  }
}

MemoryBank MemoryBank::read_text(std::istream& in) {
  MemoryBank bank;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string sx, sy, action, nx, ny;
    if (!std::getline(fields, sx, ',') || !std::getline(fields, sy, ',') || !std::getline(fields, action, ',') ||
        !std::getline(fields, nx, ',') || !std::getline(fields, ny)) {
      throw std::runtime_error("memory bank line " + std::to_string(line_no) + ": expected 5 fields");
    }
    const auto a = parse_action(action);
    if (!a) throw std::runtime_error("memory bank line " + std::to_string(line_no) + ": unknown action " + action);
    try {
      bank.store({std::stoi(sx), std::stoi(sy)}, *a, {std::stoi(nx), std::stoi(ny)});
    } catch (const std::logic_error&) {
      throw std::runtime_error("memory bank line " + std::to_string(line_no) + ": bad coordinate");
    }
  }
  return bank;
}

void VisitCounts::record_visit(GridPos state, Action action) {
  ++counts_[state][static_cast<std::size_t>(index_of(action))];
}

VisitCounts::Counts VisitCounts::numvisits(GridPos state) const {
  const auto it = counts_.find(state);
  return it == counts_.end() ? Counts{} : it->second;
}

void erase_loops(std::vector<StateAction>& walk) {
  std::vector<StateAction> kept;
  kept.reserve(walk.size());
  for (const auto& step : walk) {
    const auto seen = std::find_if(kept.begin(), kept.end(), [&](const StateAction& k) { return k.state == step.state; });
    kept.erase(seen, kept.end());
    kept.push_back(step);
  }
  walk = std::move(kept);
}

namespace {

struct BranchBest {
  std::vector<StateAction> trajectory;
  bool found = false;
};

// Walks branches [first, last) and keeps the shortest goal-reaching one, lowest
// index first among equals.
BranchBest walk_branches(const MemoryBank& bank, GridPos start, GridPos goal, const LookaheadParams& params,
                         std::uint64_t stream_seed, int first, int last) {
  const int depth = params.depth;
  BranchBest best;
  std::vector<StateAction> walk;
  walk.reserve(static_cast<std::size_t>(depth));
  std::array<std::pair<Action, GridPos>, kNumActions> options;

  for (int b = first; b < last; ++b) {
    Rng rng(derive_seed(stream_seed, static_cast<std::uint64_t>(b)));
    walk.clear();
    GridPos cur = start;
    bool reached = false;
    for (int d = 0; d < depth; ++d) {
      const auto* slots = bank.find(cur);
      if (slots == nullptr) break;
      std::size_t k = 0;
      for (Action a : kAllActions) {
        if (const auto& next = (*slots)[static_cast<std::size_t>(index_of(a))]) options[k++] = {a, *next};
      }
      if (k == 0) break;
      const auto& [action, next] = options[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)];
      walk.push_back({cur, action});
      cur = next;
      if (cur == goal) {
        reached = true;
        break;
      }
    }
    if (reached && params.erase_loops) erase_loops(walk);
    if (reached && (!best.found || walk.size() < best.trajectory.size())) {
      best.trajectory = walk;
      best.found = true;
    }
  }
  return best;
}

}  // namespace

LookaheadResult lookahead(const MemoryBank& bank, GridPos start, GridPos goal, const LookaheadParams& params,
                          std::uint64_t stream_seed) {
  if (params.branches < 1 || params.depth < 1) {
    throw std::invalid_argument("lookahead: branches and depth must be at least 1");
  }
  if (bank.empty()) return {};

  const int workers = static_cast<int>(std::clamp<unsigned>(params.threads, 1U, static_cast<unsigned>(params.branches)));
  std::vector<BranchBest> partial(static_cast<std::size_t>(workers));
  if (workers == 1) {
    partial[0] = walk_branches(bank, start, goal, params, stream_seed, 0, params.branches);
  } else {
    const int chunk = (params.branches + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int first = w * chunk;
      const int last = std::min(params.branches, first + chunk);
      pool.emplace_back([&, w, first, last] {
        partial[static_cast<std::size_t>(w)] = walk_branches(bank, start, goal, params, stream_seed, first, last);
      });
    }
  }

  LookaheadResult result;
  for (auto& p : partial) {
    if (p.found && (!result.found || p.trajectory.size() < result.trajectory.size())) {
      result.trajectory = std::move(p.trajectory);
      result.found = true;
    }
  }
  return result;
}

}  // namespace fastslow
