#include "nsa/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Consecutive failures after which a forced first kind is given up for the run.
constexpr std::size_t kForcedKindGiveUp = 200;

std::array<std::size_t, kMaxProgramSteps> quotas(const std::array<double, kMaxProgramSteps>& w,
                                                 std::size_t count) {
  std::array<std::size_t, kMaxProgramSteps> q{};
  std::array<double, kMaxProgramSteps> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < kMaxProgramSteps; ++i) {
    const double exact = w[i] * static_cast<double>(count);
    q[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(q[i]);
    assigned += q[i];
  }
  // Largest remainder; ties to the shorter length.
  while (assigned < count) {
    int best = 0;
    for (int i = 1; i < kMaxProgramSteps; ++i)
      if (rem[i] > rem[best]) best = i;
    ++q[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return q;
}

std::string format_id(const std::string& prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "-%06zu", index);
  return prefix + buf;
}

}  // namespace

std::vector<Grid> task_inputs(const Task& task) {
  std::vector<Grid> out;
  for (const auto& ex : task.train) out.push_back(ex.input);
  for (const auto& ex : task.test) out.push_back(ex.input);
  return out;
}

Program sample_program(Rng& rng, std::span<const Grid> inputs, int length,
                       std::optional<PrimitiveKind> first_kind) {
  if (length < 1 || length > kMaxProgramSteps)
    throw Error(ErrorCode::InvalidParams, "program length must be 1-3");
  if (inputs.empty()) throw Error(ErrorCode::InvalidParams, "no inputs to ground on");
  const ParamContext ctx = ParamContext::unconstrained();
  const auto kinds = all_primitive_kinds();
  const auto abstractions = list_abstractions();

  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    Program program;
    program.abstraction = abstractions[rng.index(abstractions.size())];
    std::vector<AbstractGraph> states;
    for (const auto& g : inputs) states.push_back(build_abstraction(g, program.abstraction));

    bool ok = true;
    for (int step = 0; step < length && ok; ++step) {
      const PrimitiveKind kind =
          step == 0 && first_kind ? *first_kind : kinds[rng.index(kinds.size())];
      const auto params = enumerate_primitive_params(kind, states, ctx);
      if (params.empty()) {
        ok = false;
        break;
      }
      FilterExpr filter = FilterExpr::match_all();
      if (scope_of(kind) == PrimitiveScope::Node) {
        auto filters = enumerate_filters(states);
        std::erase_if(filters, [&](const FilterExpr& f) {
          return std::all_of(states.begin(), states.end(),
                             [&](const AbstractGraph& g) { return apply_filter(f, g).empty(); });
        });
        if (filters.empty()) {
          ok = false;
          break;
        }
        filter = filters[rng.index(filters.size())];
      }
      ProgramStep ps{std::move(filter), {kind, params[rng.index(params.size())]}};
      bool changed = false;
      try {
        for (auto& s : states) {
          const Grid before = reconstruct_grid(s);
          s = apply_step(ps, s);
          if (s.height > kMaxArcSide || s.width > kMaxArcSide) throw Error(ErrorCode::SizeCapExceeded, "");
          changed = changed || reconstruct_grid(s) != before;
        }
      } catch (const Error&) {
        ok = false;
        break;
      }
      if (!changed) {
        ok = false;
        break;
      }
      program.steps.push_back(std::move(ps));
    }
    if (ok) return program;
  }
  throw Error(ErrorCode::SamplingExhausted,
              std::to_string(kMaxSampleAttempts) + " rejected sampling attempts");
}

std::optional<SyntheticTask> generate_task(std::span<const Grid> source_inputs,
                                           const Program& program) {
  if (source_inputs.size() < 2 || program.steps.empty()) return std::nullopt;
  std::vector<Grid> outputs;
  outputs.reserve(source_inputs.size());
  try {
    for (const auto& in : source_inputs) {
      Grid out = apply_program(program, in);
      if (out == in || out.height() > kMaxArcSide || out.width() > kMaxArcSide)
        return std::nullopt;
      outputs.push_back(std::move(out));
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  SyntheticTask st;
  st.program = program;
  st.label = label_of(program);
  for (std::size_t i = 0; i + 1 < source_inputs.size(); ++i)
    st.task.train.push_back({source_inputs[i], std::move(outputs[i])});
  st.task.test.push_back({source_inputs.back(), std::move(outputs.back())});
  return st;
}

std::string dedup_key(const Task& task) { return serialize_task(task); }

namespace {

Dataset generate(const GenConfig& config, std::span<const Task> sources) {
  if (config.count == 0) throw Error(ErrorCode::InvalidParams, "count must be positive");
  const double total =
      std::accumulate(config.length_weights.begin(), config.length_weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9 ||
      std::any_of(config.length_weights.begin(), config.length_weights.end(),
                  [](double w) { return w < 0; }))
    throw Error(ErrorCode::InvalidParams, "length weights must be non-negative and sum to 1");

  std::vector<std::vector<Grid>> eligible;
  Dataset data;
  Manifest& m = data.manifest;
  m.seed = config.seed;
  m.count = config.count;
  m.length_weights = config.length_weights;
  m.balance_single_primitives = config.balance_single_primitives;
  for (const auto& t : sources) {
    auto inputs = task_inputs(t);
    if (inputs.size() < 2) continue;
    eligible.push_back(std::move(inputs));
    m.sources.push_back(t.id);
  }
  if (eligible.empty()) throw Error(ErrorCode::SourceExhausted, "no source task has 2+ inputs");

  Rng rng(config.seed);
  const auto q = quotas(config.length_weights, config.count);
  std::vector<int> schedule;
  for (int len = 1; len <= kMaxProgramSteps; ++len) schedule.insert(schedule.end(), q[len - 1], len);
  for (std::size_t i = schedule.size(); i > 1; --i) std::swap(schedule[i - 1], schedule[rng.index(i)]);

  std::array<std::size_t, kNumPrimitiveKinds> first_counts{};
  std::array<std::size_t, kNumPrimitiveKinds> failures{};
  std::array<bool, kNumPrimitiveKinds> given_up{};
  std::unordered_set<std::string> keys;

  for (int length : schedule) {
    bool filled = false;
    for (std::size_t attempt = 0; attempt < config.max_slot_attempts && !filled; ++attempt) {
      ++m.attempts;
      std::optional<PrimitiveKind> forced;
      if (length == 1 && config.balance_single_primitives) {
        int best = -1;
        for (int k = 0; k < kNumPrimitiveKinds; ++k)
          if (!given_up[k] && (best < 0 || first_counts[k] < first_counts[best])) best = k;
        if (best >= 0) forced = static_cast<PrimitiveKind>(best);
      }
      auto note_failure = [&] {
        if (!forced) return;
        const int k = static_cast<int>(*forced);
        if (++failures[k] >= kForcedKindGiveUp) given_up[k] = true;
      };

      const auto& inputs = eligible[rng.index(eligible.size())];
      const std::span<const Grid> grounding(inputs.data(), inputs.size() - 1);
      std::optional<SyntheticTask> st;
      try {
        st = generate_task(inputs, sample_program(rng, grounding, length, forced));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SamplingExhausted) throw;
      }
      if (!st) {
        note_failure();
        continue;
      }
      if (!keys.insert(dedup_key(st->task)).second) continue;
      if (forced) failures[static_cast<int>(*forced)] = 0;
      st->task.id = format_id(config.id_prefix, data.records.size());
      const PrimitiveKind first = st->program.steps.front().call.kind;
      ++first_counts[static_cast<int>(first)];
      ++m.counts_per_length[length - 1];
      ++m.counts_per_first_kind[std::string(to_string(first))];
      data.records.push_back(std::move(*st));
      filled = true;
    }
    if (!filled)
      throw Error(ErrorCode::SourceExhausted,
                  "could not fill slot " + std::to_string(data.records.size()) + " after " +
                      std::to_string(config.max_slot_attempts) + " attempts");
  }
  return data;
}

}  // namespace

Dataset generate_dataset(const GenConfig& config, std::span<const Task> sources) {
  return generate(config, sources);
}

Dataset generate_tta_set(const Task& task, std::size_t n, std::uint64_t seed) {
  GenConfig config;
  config.seed = seed;
  config.count = n;
  config.id_prefix = (task.id.empty() ? std::string("task") : task.id) + "-tta";
  return generate(config, std::span<const Task>(&task, 1));
}

ordered_json record_to_json(const SyntheticTask& record) {
  ordered_json out;
  out["task_id"] = record.task.id;
  out["task"] = task_to_json(record.task);
  out["label"] = label_to_json(record.label);
  out["program"] = program_to_json(record.program);
  return out;
}

SyntheticTask record_from_json(const json& value) {
  if (!value.is_object() || !value.contains("task") || !value.contains("label") ||
      !value.contains("program"))
    throw Error(ErrorCode::MalformedJson, "dataset record needs task, label and program");
  SyntheticTask st;
  st.task = task_from_json(value.at("task"), value.value("task_id", std::string{}));
  st.label = label_from_json(value.at("label"));
  st.program = program_from_json(value.at("program"));
  return st;
}

ordered_json manifest_to_json(const Manifest& m) {
  ordered_json out;
  out["seed"] = m.seed;
  out["count"] = m.count;
  out["length_weights"] = m.length_weights;
  out["balance_single_primitives"] = m.balance_single_primitives;
  out["sources"] = m.sources;
  ordered_json per_length;
  for (int i = 0; i < kMaxProgramSteps; ++i) per_length[std::to_string(i + 1)] = m.counts_per_length[i];
  out["counts_per_length"] = std::move(per_length);
  ordered_json per_kind = ordered_json::object();
  for (const auto& [k, v] : m.counts_per_first_kind) per_kind[k] = v;
  out["counts_per_first_kind"] = std::move(per_kind);
  out["attempts"] = m.attempts;
  return out;
}

std::string dataset_to_jsonl(std::span<const SyntheticTask> records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<SyntheticTask> read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<SyntheticTask> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json value = json::parse(line, nullptr, false);
    if (value.is_discarded()) throw Error(ErrorCode::MalformedJson, "bad dataset line");
    records.push_back(record_from_json(value));
  }
  return records;
}

}  // namespace nsa
