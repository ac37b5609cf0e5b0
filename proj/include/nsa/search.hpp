#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nsa/grid.hpp"
#include "nsa/program.hpp"

namespace nsa {

struct SearchConfig {
  double time_budget_seconds = 1800.0;
  int max_depth = kMaxProgramSteps;
  // Maximum node expansions; 0 means unbounded.
  std::size_t node_budget = 0;
  // Per-depth primitive restriction; absent means every kind at every depth.
  std::optional<std::vector<std::vector<PrimitiveKind>>> allowed_primitives;
  // Children kept per expansion (best scores first); 0 keeps all.
  std::size_t beam_per_expansion = 0;
  // Record (score, depth) of every expanded node.
  bool record_trace = false;
};

using StateDigest = std::uint64_t;

// Order-sensitive hash of the reconstructed grids.
StateDigest digest_grids(std::span<const Grid> grids);
StateDigest digest_state(std::span<const AbstractGraph> graphs);
// Hash of node ids, colors, pixels and edges; separates equal grids that are
// grouped into different nodes.
StateDigest digest_structure(std::span<const AbstractGraph> graphs);

struct SearchNode {
  Program program;  // prefix; steps.size() == depth
  std::vector<AbstractGraph> states;  // one per train pair
  std::vector<Grid> grids;            // reconstructed states
  std::size_t score = 0;              // summed grid_distance to the train outputs
  int depth = 0;
};

struct SearchStats {
  std::size_t expansions = 0;
  std::size_t generated = 0;
  std::size_t pruned = 0;
  std::size_t duplicates = 0;
  std::size_t tabooed = 0;
  bool timed_out = false;
  bool exhausted = false;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::size_t, int>> trace;
};

struct Solution {
  Program program;
  std::vector<Grid> test_outputs;
};

struct SolveResult {
  std::optional<Solution> solution;
  SearchStats stats;
};

// Greedy best-first search over programs for one task. Frontier priority is
// (score, depth, insertion order); one root per abstraction kind.
class Searcher {
 public:
  Searcher(const Task& task, SearchConfig config);

  std::vector<SearchNode> roots() const;
  // Scored children that survive constraints, taboo and digest dedup; tabooed
  // children are held back for run(). Children at max depth are only returned
  // when they fit every train pair exactly.
  std::vector<SearchNode> expand(const SearchNode& node);
  bool check_constraints(const SearchNode& child, const SearchNode& parent) const;

  SolveResult run();

  const SearchStats& stats() const { return stats_; }

 private:
  struct TabooKey {
    int depth;
    std::string transform;
    friend bool operator==(const TabooKey&, const TabooKey&) = default;
  };
  struct TabooHash {
    std::size_t operator()(const TabooKey& k) const;
  };
  struct Queued {
    std::size_t score;
    int depth;
    std::size_t seq;
    Program program;
  };

  bool out_of_time();
  bool remember(const SearchNode& node);
  std::optional<std::vector<Grid>> predict_tests(const Program& program) const;
  std::span<const PrimitiveKind> kinds_at(int depth) const;
  bool resize_reachable(int from_depth) const;
  SearchNode replay(const Program& program, std::size_t score) const;

  const Task& task_;
  SearchConfig config_;
  ParamContext context_;
  std::array<bool, kNumColors> palette_{};
  std::vector<std::vector<AbstractGraph>> root_states_;  // by abstraction
  std::chrono::steady_clock::time_point deadline_;
  std::chrono::steady_clock::time_point started_;
  // (abstraction, digest) -> serialized grid lists with that digest.
  std::unordered_map<std::uint64_t, std::vector<std::string>> seen_;
  std::unordered_set<TabooKey, TabooHash> taboo_;
  // Children held back by the taboo list.
  std::vector<Queued> deferred_;
  SearchStats stats_;
  std::optional<Solution> found_;
};

// One attempt per task: a program with train score 0 plus its test predictions,
// or nothing when the budget runs out.
SolveResult solve(const Task& task, const SearchConfig& config);

}  // namespace nsa
