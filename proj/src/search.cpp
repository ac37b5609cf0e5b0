#include "nsa/search.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "nsa/error.hpp"

namespace nsa {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void mix(std::uint64_t& h, std::uint64_t v) {
  v += 0x9e3779b97f4a7c15ull;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
  h = (h ^ v ^ (v >> 31)) * kFnvPrime;
}

void serialize_grid(const Grid& g, std::string& out) {
  out.push_back(static_cast<char>(g.height()));
  out.push_back(static_cast<char>(g.width()));
  out.append(reinterpret_cast<const char*>(g.cells().data()), g.cells().size());
}

// Compact, unambiguous byte encoding of a filter expression.
void encode(const FilterExpr& f, std::string& out) {
  out.push_back(static_cast<char>(f.op));
  if (f.op == FilterOp::Leaf) {
    out.push_back(static_cast<char>(f.kind));
    out.push_back(static_cast<char>(f.param.special));
    out.append(reinterpret_cast<const char*>(&f.param.value), sizeof f.param.value);
  }
  for (const auto& c : f.children) encode(c, out);
  out.push_back(')');
}

std::string transform_key(AbstractionKind abstraction, const ProgramStep& step) {
  std::string key;
  key.push_back(static_cast<char>(abstraction));
  encode(step.filter, key);
  const auto& p = step.call.params;
  key.push_back(static_cast<char>(step.call.kind));
  for (int v : {static_cast<int>(p.direction), static_cast<int>(p.axis),
                static_cast<int>(p.anchor), static_cast<int>(p.color),
                static_cast<int>(p.source_color), p.angle, p.count})
    key.append(reinterpret_cast<const char*>(&v), sizeof v);
  return key;
}

std::array<bool, kNumColors> colors_of(std::span<const Grid> grids) {
  std::array<bool, kNumColors> seen{};
  for (const auto& g : grids)
    for (Color c : g.cells()) seen[c] = true;
  return seen;
}

}  // namespace

StateDigest digest_grids(std::span<const Grid> grids) {
  std::uint64_t h = kFnvOffset;
  for (const auto& g : grids) {
    mix(h, static_cast<std::uint64_t>(g.height()) << 32 | static_cast<std::uint32_t>(g.width()));
    for (Color c : g.cells()) {
      h ^= c;
      h *= kFnvPrime;
    }
  }
  return h;
}

StateDigest digest_structure(std::span<const AbstractGraph> graphs) {
  std::uint64_t h = kFnvOffset;
  for (const auto& g : graphs) {
    mix(h, g.nodes.size());
    for (const auto& n : g.nodes) {
      mix(h, static_cast<std::uint64_t>(n.id) << 8 | n.color);
      std::uint64_t acc = n.pixels.size();
      for (const auto& p : n.pixels)
        acc = acc * kFnvPrime + (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.row)) << 32 |
                                 static_cast<std::uint32_t>(p.col) << 8 | p.color);
      mix(h, acc);
    }
    for (const auto& e : g.edges)
      mix(h, static_cast<std::uint64_t>(e.a) << 33 | static_cast<std::uint64_t>(e.b) << 1 |
                 static_cast<std::uint64_t>(e.tag));
  }
  return h;
}

StateDigest digest_state(std::span<const AbstractGraph> graphs) {
  std::vector<Grid> grids;
  grids.reserve(graphs.size());
  for (const auto& g : graphs) grids.push_back(reconstruct_grid(g));
  return digest_grids(grids);
}

std::size_t Searcher::TabooHash::operator()(const TabooKey& k) const {
  return std::hash<std::string>{}(k.transform) * 31 + static_cast<std::size_t>(k.depth);
}

Searcher::Searcher(const Task& task, SearchConfig config)
    : task_(task), config_(std::move(config)), context_(ParamContext::from_task(task)) {
  if (task_.train.empty()) throw Error(ErrorCode::EmptyTrainSet, "task has no train pairs");
  config_.max_depth = std::clamp(config_.max_depth, 1, kMaxProgramSteps);
  if (config_.allowed_primitives) {
    auto& allowed = *config_.allowed_primitives;
    config_.max_depth = std::min<int>(config_.max_depth, static_cast<int>(allowed.size()));
  }
  for (const auto& ex : task_.train)
    for (Color c : ex.output.cells()) palette_[c] = true;
  for (AbstractionKind kind : list_abstractions()) {
    auto& states = root_states_.emplace_back();
    for (const auto& ex : task_.train) states.push_back(build_abstraction(ex.input, kind));
  }
  started_ = std::chrono::steady_clock::now();
  deadline_ = started_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(config_.time_budget_seconds));
}

std::span<const PrimitiveKind> Searcher::kinds_at(int depth) const {
  if (config_.allowed_primitives) return (*config_.allowed_primitives)[depth];
  return all_primitive_kinds();
}

bool Searcher::resize_reachable(int from_depth) const {
  for (int d = from_depth; d < config_.max_depth; ++d)
    for (PrimitiveKind k : kinds_at(d))
      if (can_resize(k)) return true;
  return false;
}

bool Searcher::out_of_time() {
  if (std::chrono::steady_clock::now() >= deadline_) stats_.timed_out = true;
  return stats_.timed_out;
}

std::vector<SearchNode> Searcher::roots() const {
  std::vector<SearchNode> out;
  for (std::size_t i = 0; i < root_states_.size(); ++i) {
    SearchNode node;
    node.program.abstraction = list_abstractions()[i];
    node.states = root_states_[i];
    for (std::size_t p = 0; p < node.states.size(); ++p) {
      node.grids.push_back(reconstruct_grid(node.states[p]));
      node.score += grid_distance(node.grids.back(), task_.train[p].output);
    }
    out.push_back(std::move(node));
  }
  return out;
}

SearchNode Searcher::replay(const Program& program, std::size_t score) const {
  SearchNode node;
  node.program = program;
  node.depth = static_cast<int>(program.steps.size());
  node.score = score;
  node.states = root_states_[static_cast<int>(program.abstraction)];
  for (const auto& step : program.steps)
    for (auto& s : node.states) s = apply_step(step, s);
  for (const auto& s : node.states) node.grids.push_back(reconstruct_grid(s));
  return node;
}

// True when the state was not seen before under the same abstraction. Equal
// grids only merge when the node structure over them matches as well.
bool Searcher::remember(const SearchNode& node) {
  std::uint64_t key = digest_grids(node.grids);
  mix(key, static_cast<std::uint64_t>(node.program.abstraction));
  std::string bytes;
  for (const auto& g : node.grids) serialize_grid(g, bytes);
  const std::uint64_t structure = digest_structure(node.states);
  bytes.append(reinterpret_cast<const char*>(&structure), sizeof structure);
  auto& bucket = seen_[key];
  if (std::find(bucket.begin(), bucket.end(), bytes) != bucket.end()) return false;
  bucket.push_back(std::move(bytes));
  return true;
}

std::optional<std::vector<Grid>> Searcher::predict_tests(const Program& program) const {
  std::vector<Grid> outputs;
  try {
    for (const auto& ex : task_.test) {
      Grid out = apply_program(program, ex.input);
      if (out.height() > kMaxArcSide || out.width() > kMaxArcSide) return std::nullopt;
      outputs.push_back(std::move(out));
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return outputs;
}

bool Searcher::check_constraints(const SearchNode& child, const SearchNode& parent) const {
  if (child.score == 0) return true;
  // Palette: no color absent from the parent state and from every train output.
  const auto before = colors_of(parent.grids);
  const auto after = colors_of(child.grids);
  for (int c = 0; c < kNumColors; ++c)
    if (after[c] && !before[c] && !palette_[c]) return false;
  // Dimensions must still be able to reach the output dimensions.
  if (!resize_reachable(child.depth))
    for (std::size_t i = 0; i < child.grids.size(); ++i)
      if (child.grids[i].height() != task_.train[i].output.height() ||
          child.grids[i].width() != task_.train[i].output.width())
        return false;
  // Final-depth monotonicity.
  if (child.depth >= config_.max_depth && child.score > parent.score) return false;
  return true;
}

std::vector<SearchNode> Searcher::expand(const SearchNode& node) {
  std::vector<SearchNode> children;
  if (node.depth >= config_.max_depth || found_) return children;

  const auto filters = enumerate_filters(node.states);
  std::vector<std::vector<NodeSet>> selections;
  std::vector<bool> selects_any;
  selections.reserve(filters.size());
  for (const auto& f : filters) {
    auto& per_pair = selections.emplace_back();
    bool any = false;
    for (const auto& s : node.states) {
      per_pair.push_back(apply_filter(f, s));
      any = any || !per_pair.back().empty();
    }
    selects_any.push_back(any);
  }
  // Filters selecting the same nodes on every train pair yield the same child
  // states; only the first of each group is evaluated in full.
  std::vector<std::size_t> canonical(filters.size());
  for (std::size_t fi = 0; fi < filters.size(); ++fi) {
    canonical[fi] = fi;
    for (std::size_t fj = 0; fj < fi; ++fj)
      if (canonical[fj] == fj && selections[fj] == selections[fi]) {
        canonical[fi] = fj;
        break;
      }
  }

  const int child_depth = node.depth + 1;
  const bool final_depth = child_depth >= config_.max_depth;
  for (PrimitiveKind kind : kinds_at(node.depth)) {
    const bool grid_level = scope_of(kind) == PrimitiveScope::Grid;
    const auto params = enumerate_primitive_params(kind, node.states, context_);
    const std::size_t filter_count = grid_level ? 1 : filters.size();
    // exact_fit[fi][pi]: the call fit every train pair exactly.
    std::vector<std::vector<bool>> exact_fit(filter_count);
    for (std::size_t fi = 0; fi < filter_count; ++fi) {
      if (!grid_level && !selects_any[fi]) continue;
      exact_fit[fi].assign(params.size(), false);
      const bool shadowed = !grid_level && canonical[fi] != fi;
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        if (out_of_time()) return children;
        ++stats_.generated;
        SearchNode child;
        child.depth = child_depth;
        child.program = node.program;
        child.program.steps.push_back({filters[fi], {kind, p}});
        const ProgramStep& step = child.program.steps.back();
        // Same train states as the canonical filter's child, so at best a
        // duplicate unless it fits exactly and predicts the tests differently.
        if (shadowed && !exact_fit[canonical[fi]][pi]) {
          ++stats_.duplicates;
          continue;
        }
        bool misfit = false;
        try {
          if (grid_level) {
            // Every abstraction is lossless, so the transformed canvas is the
            // child grid; re-abstraction waits until the child is kept.
            for (std::size_t i = 0; i < node.states.size() && !misfit; ++i) {
              child.grids.push_back(
                  apply_grid_primitive(step.call, node.grids[i], node.states[i].background));
              child.score += grid_distance(child.grids.back(), task_.train[i].output);
              misfit = final_depth && child.score > 0;
            }
            if (!misfit)
              for (std::size_t i = 0; i < node.states.size(); ++i)
                child.states.push_back(build_abstraction(child.grids[i], node.states[i].kind));
          } else {
            for (std::size_t i = 0; i < node.states.size() && !misfit; ++i) {
              child.states.push_back(apply_primitive(step.call, node.states[i], selections[fi][i]));
              const Grid& target = task_.train[i].output;
              // Final-depth children only matter when they fit exactly.
              if (final_depth && (child.states.back().height != target.height() ||
                                  child.states.back().width != target.width())) {
                misfit = true;
                break;
              }
              child.grids.push_back(reconstruct_grid(child.states.back()));
              child.score += grid_distance(child.grids.back(), target);
              misfit = final_depth && child.score > 0;
            }
          }
        } catch (const Error&) {
          ++stats_.pruned;
          continue;
        }
        if (misfit) {
          ++stats_.pruned;
          continue;
        }

        if (child.score == 0) {
          exact_fit[fi][pi] = true;
          if (auto tests = predict_tests(child.program)) {
            found_ = Solution{child.program, std::move(*tests)};
            children.push_back(std::move(child));
            return children;
          }
        }
        if (final_depth || !check_constraints(child, node)) {
          ++stats_.pruned;
          continue;
        }
        if (!remember(child)) {
          ++stats_.duplicates;
          continue;
        }
        // A transformation that failed to improve once is only explored again
        // at this depth when it improves.
        if (child.score >= node.score) {
          TabooKey key{node.depth, transform_key(node.program.abstraction, step)};
          if (!taboo_.insert(std::move(key)).second) {
            ++stats_.tabooed;
            deferred_.push_back({child.score, child.depth, 0, std::move(child.program)});
            continue;
          }
        }
        children.push_back(std::move(child));
      }
    }
  }
  if (config_.beam_per_expansion > 0 && children.size() > config_.beam_per_expansion) {
    std::stable_sort(children.begin(), children.end(),
                     [](const SearchNode& a, const SearchNode& b) { return a.score < b.score; });
    children.resize(config_.beam_per_expansion);
  }
  return children;
}

SolveResult Searcher::run() {
  auto cmp = [](const Queued& a, const Queued& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.seq > b.seq;
  };
  std::priority_queue<Queued, std::vector<Queued>, decltype(cmp)> frontier(cmp);
  std::size_t seq = 0;
  auto budget_left = [&] {
    return !out_of_time() && (config_.node_budget == 0 || stats_.expansions < config_.node_budget);
  };
  auto visit = [&](const SearchNode& node) {
    ++stats_.expansions;
    if (config_.record_trace) stats_.trace.emplace_back(node.score, node.depth);
    for (auto& child : expand(node)) {
      if (found_) break;
      frontier.push({child.score, child.depth, seq++, std::move(child.program)});
    }
  };

  // Every abstraction gets its first expansion before the frontier takes over,
  // so one scheme's descendants cannot starve the others at equal root scores.
  auto initial = roots();
  for (const auto& root : initial) remember(root);
  for (const auto& root : initial) {
    if (found_ || !budget_left()) break;
    visit(root);
  }
  // Tabooed children are only explored once everything else is used up.
  while (!found_ && budget_left()) {
    if (frontier.empty()) {
      if (deferred_.empty()) break;
      for (auto& q : deferred_) frontier.push({q.score, q.depth, seq++, std::move(q.program)});
      deferred_.clear();
    }
    Queued top = frontier.top();
    frontier.pop();
    visit(replay(top.program, top.score));
  }
  stats_.exhausted = frontier.empty() && deferred_.empty() && !found_ && !stats_.timed_out &&
                    (config_.node_budget == 0 || stats_.expansions < config_.node_budget);
  stats_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();

  SolveResult result;
  result.stats = stats_;
  if (found_) {
    for (const auto& ex : task_.train)
      if (apply_program(found_->program, ex.input) != ex.output)
        throw std::logic_error("search returned a program that does not fit the train pairs");
    result.solution = found_;
  }
  return result;
}

SolveResult solve(const Task& task, const SearchConfig& config) {
  return Searcher(task, config).run();
}

}  // namespace nsa
