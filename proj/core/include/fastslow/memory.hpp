#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fastslow/grid_world.hpp"

namespace fastslow {

struct StateAction {
  GridPos state;
  Action action = Action::Up;

  friend bool operator==(const StateAction&, const StateAction&) = default;
};

struct TransitionRecord {
  GridPos state;
  Action action = Action::Up;
  GridPos next_state;

  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

/// Transition store keyed by state. Each (state, action) holds at most one next
/// state: storing a transition evicts any conflicting outcome for the same pair.
class MemoryBank {
 public:
  using Slots = std::array<std::optional<GridPos>, kNumActions>;

  void store(GridPos state, Action action, GridPos next_state);
  void store(const TransitionRecord& t) { store(t.state, t.action, t.next_state); }

  /// Stored (action, next state) pairs under `state`, in action order.
  std::vector<std::pair<Action, GridPos>> lookup(GridPos state) const;
  /// Raw slots for `state`, or nullptr for unknown keys.
  const Slots* find(GridPos state) const noexcept;

  std::size_t num_transitions() const noexcept { return transitions_; }
  std::size_t num_states() const noexcept { return table_.size(); }
  bool empty() const noexcept { return transitions_ == 0; }
  void clear() noexcept;

  /// All transitions sorted by (state.y, state.x, action).
  std::vector<TransitionRecord> records() const;

  /// One `sx,sy,action,nx,ny` line per transition, sorted as records().
  void write_text(std::ostream& out) const;
  /// Inverse of write_text. Throws std::runtime_error on malformed lines.
  static MemoryBank read_text(std::istream& in);

 private:
  std::unordered_map<GridPos, Slots> table_;
  std::size_t transitions_ = 0;
};

/// Per-episode (state, action) sample counts.
class VisitCounts {
 public:
  using Counts = std::array<int, kNumActions>;

  void record_visit(GridPos state, Action action);
  Counts numvisits(GridPos state) const;
  void clear() noexcept { counts_.clear(); }
  bool empty() const noexcept { return counts_.empty(); }

 private:
  std::unordered_map<GridPos, Counts> counts_;
};

/// Episodic bank and its visit counts, plus the overall bank that outlives episodes.
struct MemorySystem {
  MemoryBank overall;
  MemoryBank episodic;
  VisitCounts visits;

  void begin_episode() noexcept {
    episodic.clear();
    visits.clear();
  }

  /// Stores into both banks so a conflicting transition is evicted from each.
  void store(GridPos state, Action action, GridPos next_state) {
    episodic.store(state, action, next_state);
    overall.store(state, action, next_state);
  }
};

struct LookaheadParams {
  int branches = 100;
  int depth = 20;
  /// Worker threads for the branch walks; results do not depend on this.
  unsigned threads = 1;
  /// Cut cycles out of goal-reaching walks before comparing lengths.
  bool erase_loops = true;
};

struct LookaheadResult {
  std::vector<StateAction> trajectory;
  bool found = false;
};

/// Chronological loop erasure: whenever a step leaves a state that an earlier
/// kept step also left, everything from that earlier step on is dropped. The
/// result is still a chain of stored transitions with distinct source states.
void erase_loops(std::vector<StateAction>& walk);

/// Runs `branches` independent random walks over `bank` from `start`, each
/// stopping at `goal`, at a state with no stored transitions, or after `depth`
/// transitions. Goal-reaching walks are loop-erased when params.erase_loops is
/// set. Returns the shortest walk that reached the goal (lowest branch
/// index on ties). Branch b draws from its own engine seeded with
/// derive_seed(stream_seed, b).
LookaheadResult lookahead(const MemoryBank& bank, GridPos start, GridPos goal, const LookaheadParams& params,
                          std::uint64_t stream_seed);

}  // namespace fastslow
