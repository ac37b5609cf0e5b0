#include <algorithm>
#include <queue>
#include <random>
#include <unordered_map>

#include "doctest.h"
#include "nsa/error.hpp"
#include "nsa/search.hpp"
#include "support.hpp"

using namespace nsa;
using testing::grid;
using testing::make_task;

namespace {

Task recolor_task() {
  return make_task({{grid({{2, 0, 1}}), grid({{3, 0, 1}})}, {grid({{0, 2, 2}, {4, 0, 0}}), grid({{0, 3, 3}, {4, 0, 0}})}},
                   {grid({{1, 2}})});
}

// A left-right flip of the canvas, then update_color 2 -> 3 on the red nodes.
Task two_step_task() {
  return make_task({{grid({{2, 0, 1}, {0, 0, 1}}), grid({{1, 0, 3}, {1, 0, 0}})},
                    {grid({{0, 2, 2}, {1, 0, 0}}), grid({{3, 3, 0}, {0, 0, 1}})},
                    {grid({{2, 1, 0}}), grid({{0, 1, 3}})}},
                   {grid({{1, 2}})});
}

SearchConfig quick(double seconds = 20.0) {
  SearchConfig c;
  c.time_budget_seconds = seconds;
  return c;
}

}  // namespace

TEST_CASE("a recolor task is solved with test predictions") {
  const Task t = recolor_task();
  const auto r = solve(t, quick());
  REQUIRE(r.solution);
  CHECK(r.solution->test_outputs == std::vector<Grid>{grid({{1, 3}})});
  CHECK(r.solution->program.steps.size() == 1);
  for (const auto& ex : t.train) CHECK(apply_program(r.solution->program, ex.input) == ex.output);
  CHECK_FALSE(r.stats.timed_out);
}

TEST_CASE("contradictory train pairs give no program") {
  const Task t = make_task({{grid({{1, 0}}), grid({{2, 0}})}, {grid({{1, 0}}), grid({{3, 0}})}}, {grid({{1}})});
  SearchConfig c = quick();
  c.max_depth = 1;
  const auto r = solve(t, c);
  CHECK_FALSE(r.solution);
  CHECK(r.stats.exhausted);
}

TEST_CASE("an empty train set is an error") {
  Task t;
  t.test.push_back({grid({{1}}), std::nullopt});
  try {
    solve(t, quick());
    FAIL("expected EmptyTrainSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTrainSet);
  }
}

TEST_CASE("restriction to the true kinds needs fewer expansions") {
  const Task t = two_step_task();
  const auto open = solve(t, quick(60));
  SearchConfig c = quick(60);
  c.allowed_primitives = {{PrimitiveKind::MirrorGrid}, {PrimitiveKind::UpdateColor}};
  const auto narrow = solve(t, c);
  REQUIRE(narrow.solution);
  REQUIRE(open.solution);
  CHECK(narrow.stats.expansions <= open.stats.expansions);
  CHECK(narrow.stats.generated < open.stats.generated);
  CHECK(narrow.solution->test_outputs == std::vector<Grid>{grid({{3, 1}})});
  CHECK(open.solution->test_outputs == std::vector<Grid>{grid({{3, 1}})});
  for (const auto& s : narrow.solution->program.steps)
    CHECK((s.call.kind == PrimitiveKind::UpdateColor || s.call.kind == PrimitiveKind::MirrorGrid));
}

TEST_CASE("an upscale-only restriction finds the upscale") {
  const Task t = make_task({{grid({{1, 0}}), grid({{1, 1, 0, 0}, {1, 1, 0, 0}})},
                            {grid({{0}, {4}}), grid({{0, 0}, {0, 0}, {4, 4}, {4, 4}})}},
                           {grid({{5}})});
  SearchConfig c = quick();
  c.allowed_primitives = {{PrimitiveKind::UpscaleGrid}};
  const auto r = solve(t, c);
  REQUIRE(r.solution);
  CHECK(r.solution->program.steps.front().call.kind == PrimitiveKind::UpscaleGrid);
  CHECK(r.solution->test_outputs == std::vector<Grid>{grid({{5, 5}, {5, 5}})});
  CHECK(r.stats.expansions <= list_abstractions().size());
}

TEST_CASE("nodes at max depth have no children") {
  const Task t = two_step_task();
  SearchConfig c = quick();
  c.max_depth = 2;
  c.allowed_primitives = {{PrimitiveKind::MoveNode}, {PrimitiveKind::MoveNode}};
  Searcher s(t, c);
  const auto root = s.roots().front();
  const auto level1 = s.expand(root);
  REQUIRE_FALSE(level1.empty());
  for (const auto& child : level1) {
    CHECK(child.depth == 1);
    for (const auto& grandchild : s.expand(child)) CHECK(grandchild.score == 0);
  }
  SearchNode deep = level1.front();
  deep.depth = 2;
  CHECK(s.expand(deep).empty());
}

TEST_CASE("children are unique states and duplicates are counted") {
  // Moving the lone pixel left or pushing it to the border give the same grid.
  const Task t = make_task({{grid({{0, 1, 0}}), grid({{0, 0, 5}})}}, {grid({{1}})});
  SearchConfig c = quick();
  c.max_depth = 2;
  Searcher s(t, c);
  for (const auto& root : s.roots()) {
    const auto kids = s.expand(root);
    std::vector<std::pair<std::vector<Grid>, StateDigest>> seen;
    for (const auto& k : kids) {
      std::pair<std::vector<Grid>, StateDigest> key{k.grids, digest_structure(k.states)};
      CHECK(std::find(seen.begin(), seen.end(), key) == seen.end());
      seen.push_back(std::move(key));
      CHECK(k.program.abstraction == root.program.abstraction);
    }
  }
  CHECK(s.stats().duplicates > 0);
}

TEST_CASE("constraints: palette, reachable dimensions, final-depth monotonicity") {
  const Task t = make_task({{grid({{1, 0}}), grid({{2, 0, 0}})}}, {grid({{1}})});
  SearchConfig c = quick();
  c.max_depth = 2;
  c.allowed_primitives = {{PrimitiveKind::UpdateColor}, {PrimitiveKind::UpdateColor}};
  Searcher fixed(t, c);
  SearchNode parent = fixed.roots().front();
  SearchNode child = parent;
  child.depth = 1;
  child.score = 2;
  CHECK_FALSE(fixed.check_constraints(child, parent));  // 1x2 can never become 1x3

  c.allowed_primitives = {{PrimitiveKind::UpdateColor}, {PrimitiveKind::Duplicate}};
  Searcher growable(t, c);
  CHECK(growable.check_constraints(child, parent));
  child.grids = {grid({{7, 0}})};
  CHECK_FALSE(growable.check_constraints(child, parent));  // 7 is nowhere
  child.grids = {grid({{2, 0}})};
  CHECK(growable.check_constraints(child, parent));

  child.depth = 2;
  child.score = parent.score + 1;
  CHECK_FALSE(growable.check_constraints(child, parent));
  child.score = 0;
  CHECK(growable.check_constraints(child, parent));
}

TEST_CASE("grid digests: equal inputs agree, distinct inputs do not collide") {
  std::mt19937 rng(17);
  std::unordered_map<StateDigest, std::vector<Grid>> by_digest;
  std::size_t collisions = 0;
  for (int i = 0; i < 100000; ++i) {
    std::vector<Grid> grids{testing::random_grid(rng, 5, 4), testing::random_grid(rng, 3, 4)};
    const StateDigest d = digest_grids(grids);
    CHECK(d == digest_grids(std::vector<Grid>(grids)));
    auto& bucket = by_digest[d];
    if (!bucket.empty() && bucket != grids) ++collisions;
    bucket = std::move(grids);
  }
  CHECK(collisions == 0);
  const Grid a = grid({{1, 2}}), b = grid({{2, 1}});
  CHECK(digest_grids(std::vector<Grid>{a, b}) != digest_grids(std::vector<Grid>{b, a}));
  CHECK(digest_grids(std::vector<Grid>{grid({{1, 2}})}) != digest_grids(std::vector<Grid>{grid({{1}, {2}})}));
}

TEST_CASE("structure digest separates equal grids grouped differently") {
  const Grid g = grid({{1, 2, 0}});
  const auto by_color = build_abstraction(g, AbstractionKind::SameColor4);
  const auto merged = build_abstraction(g, AbstractionKind::MultiColor4);
  CHECK(reconstruct_grid(by_color) == reconstruct_grid(merged));
  CHECK(digest_state(std::span(&by_color, 1)) == digest_state(std::span(&merged, 1)));
  CHECK(digest_structure(std::span(&by_color, 1)) != digest_structure(std::span(&merged, 1)));
}

TEST_CASE("expansion order is greedy best-first over (score, depth, insertion)") {
  // Oracle: the same loop written against roots() and expand() directly.
  const Task t = two_step_task();
  SearchConfig c = quick();
  c.node_budget = 40;
  c.record_trace = true;
  c.allowed_primitives = {{PrimitiveKind::MoveNode, PrimitiveKind::UpdateColor},
                          {PrimitiveKind::MoveNode, PrimitiveKind::UpdateColor},
                          {PrimitiveKind::MirrorGrid}};
  const auto result = solve(t, c);

  Searcher s(t, c);
  std::vector<std::pair<std::size_t, int>> expected;
  struct Item {
    std::size_t score;
    int depth;
    std::size_t seq;
    SearchNode node;
  };
  auto worse = [](const Item& a, const Item& b) {
    return std::tie(a.score, a.depth, a.seq) > std::tie(b.score, b.depth, b.seq);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(worse)> frontier(worse);
  std::size_t seq = 0;
  bool found = false;
  auto visit = [&](const SearchNode& n) {
    expected.emplace_back(n.score, n.depth);
    for (auto& child : s.expand(n)) {
      if (child.score == 0) found = true;
      if (found) break;
      frontier.push({child.score, child.depth, seq++, std::move(child)});
    }
  };
  for (const auto& root : s.roots()) {
    if (found || expected.size() >= c.node_budget) break;
    visit(root);
  }
  while (!frontier.empty() && !found && expected.size() < c.node_budget) {
    Item top = frontier.top();
    frontier.pop();
    visit(top.node);
  }
  CHECK(result.stats.trace == expected);
}

TEST_CASE("budgets are honoured") {
  std::mt19937 rng(23);
  Task hard;
  for (int i = 0; i < 3; ++i)
    hard.train.push_back({testing::random_grid(rng, 12, 10, 0.4), testing::random_grid(rng, 12, 10, 0.4)});
  hard.test.push_back({testing::random_grid(rng, 12, 10, 0.4), std::nullopt});

  SearchConfig c = quick(0.5);
  const auto timed = solve(hard, c);
  CHECK_FALSE(timed.solution);
  CHECK(timed.stats.timed_out);
  CHECK_FALSE(timed.stats.exhausted);
  CHECK(timed.stats.wall_seconds < 1.5);

  c = quick(60);
  c.node_budget = 5;
  const auto capped = solve(hard, c);
  CHECK(capped.stats.expansions <= 5);
  CHECK_FALSE(capped.stats.exhausted);
}

TEST_CASE("the mini suite is solved and every prediction matches") {
  for (const auto& t : load_task_dir(testing::test_data_dir() + "/mini")) {
    CAPTURE(t.id);
    const auto r = solve(t, quick(30));
    REQUIRE(r.solution);
    for (const auto& ex : t.train) CHECK(apply_program(r.solution->program, ex.input) == ex.output);
    REQUIRE(r.solution->test_outputs.size() == t.test.size());
    for (std::size_t i = 0; i < t.test.size(); ++i) CHECK(r.solution->test_outputs[i] == *t.test[i].output);
  }
}
