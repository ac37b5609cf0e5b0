#include "nsa/program.hpp"

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

AbstractGraph apply_step(const ProgramStep& step, const AbstractGraph& graph) {
  if (scope_of(step.call.kind) == PrimitiveScope::Grid)
    return apply_primitive(step.call, graph, {});
  return apply_primitive(step.call, graph, apply_filter(step.filter, graph));
}

Grid apply_program(const Program& program, const Grid& input) {
  AbstractGraph graph = build_abstraction(input, program.abstraction);
  for (const auto& step : program.steps) graph = apply_step(step, graph);
  return reconstruct_grid(graph);
}

ordered_json program_to_json(const Program& program) {
  ordered_json out;
  out["abstraction"] = to_string(program.abstraction);
  ordered_json steps = ordered_json::array();
  for (const auto& s : program.steps) {
    ordered_json step;
    step["filter"] = filter_to_json(s.filter);
    step["primitive"] = call_to_json(s.call);
    steps.push_back(std::move(step));
  }
  out["steps"] = std::move(steps);
  return out;
}

Program program_from_json(const json& value) {
  if (!value.is_object() || !value.contains("abstraction") || !value.contains("steps") ||
      !value.at("abstraction").is_string())
    throw Error(ErrorCode::MalformedProgram, "program needs \"abstraction\" and \"steps\"");
  const auto kind = abstraction_from_string(value.at("abstraction").get<std::string>());
  if (!kind) throw Error(ErrorCode::MalformedProgram, "unknown abstraction");
  const json& steps = value.at("steps");
  if (!steps.is_array() || steps.empty() || steps.size() > kMaxProgramSteps)
    throw Error(ErrorCode::MalformedProgram, "program needs 1-3 steps");
  Program program;
  program.abstraction = *kind;
  for (const auto& s : steps) {
    if (!s.is_object() || !s.contains("filter") || !s.contains("primitive"))
      throw Error(ErrorCode::MalformedProgram, "step needs \"filter\" and \"primitive\"");
    ProgramStep step{filter_from_json(s.at("filter")), call_from_json(s.at("primitive"))};
    if (scope_of(step.call.kind) == PrimitiveScope::Grid && !step.filter.is_match_all())
      throw Error(ErrorCode::MalformedProgram, "grid-level primitive needs the match-all filter");
    program.steps.push_back(std::move(step));
  }
  return program;
}

std::string describe(const Program& program) { return program_to_json(program).dump(); }

}  // namespace nsa

namespace nsa {

Label label_of(const Program& program) {
  Label label{};
  for (std::size_t i = 0; i < program.steps.size() && i < label.size(); ++i)
    label[i] = program.steps[i].call.kind;
  return label;
}

int label_length(const Label& label) {
  int n = 0;
  for (const auto& k : label)
    if (k) ++n;
  return n;
}

bool well_formed(const Label& label) {
  bool padding = false;
  for (const auto& k : label) {
    if (!k) padding = true;
    else if (padding) return false;
  }
  return label[0].has_value();
}

std::string_view label_name(const std::optional<PrimitiveKind>& kind) {
  return kind ? to_string(*kind) : kNoTrans;
}

std::optional<PrimitiveKind> label_kind_from_string(std::string_view name, bool& ok) {
  ok = true;
  if (name == kNoTrans) return std::nullopt;
  auto kind = primitive_from_string(name);
  ok = kind.has_value();
  return kind;
}

nlohmann::ordered_json label_to_json(const Label& label) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& k : label) out.push_back(label_name(k));
  return out;
}

Label label_from_json(const nlohmann::json& value) {
  if (!value.is_array() || value.size() != kMaxProgramSteps)
    throw Error(ErrorCode::MalformedProgram, "label must list 3 kinds");
  Label label{};
  for (std::size_t i = 0; i < label.size(); ++i) {
    bool ok = false;
    if (value[i].is_string()) label[i] = label_kind_from_string(value[i].get<std::string>(), ok);
    if (!ok) throw Error(ErrorCode::MalformedProgram, "unknown label kind");
  }
  if (!well_formed(label)) throw Error(ErrorCode::MalformedProgram, "no_trans before a real kind");
  return label;
}

}  // namespace nsa
