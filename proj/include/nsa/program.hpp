#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsa/abstraction.hpp"
#include "nsa/filters.hpp"
#include "nsa/primitives.hpp"

namespace nsa {

inline constexpr int kMaxProgramSteps = 3;

struct ProgramStep {
  FilterExpr filter;
  PrimitiveCall call;

  friend bool operator==(const ProgramStep&, const ProgramStep&) = default;
};

// One abstraction plus 1-3 (filter, primitive) steps.
struct Program {
  AbstractionKind abstraction = AbstractionKind::SameColor4;
  std::vector<ProgramStep> steps;

  friend bool operator==(const Program&, const Program&) = default;
};

// Filter then primitive; grid-level primitives ignore the selection.
AbstractGraph apply_step(const ProgramStep& step, const AbstractGraph& graph);

// Builds the abstraction once and folds the steps over the evolving graph.
// Propagates Error(SizeCapExceeded | InvalidParams).
Grid apply_program(const Program& program, const Grid& input);

nlohmann::ordered_json program_to_json(const Program& program);
// Throws Error(MalformedProgram).
Program program_from_json(const nlohmann::json& value);
std::string describe(const Program& program);

}  // namespace nsa

namespace nsa {

// Primitive kind per classification position; nullopt is no_trans.
using Label = std::array<std::optional<PrimitiveKind>, kMaxProgramSteps>;

// True kinds padded with no_trans.
Label label_of(const Program& program);
int label_length(const Label& label);
// Length 3, and no_trans never precedes a real kind.
bool well_formed(const Label& label);

std::string_view label_name(const std::optional<PrimitiveKind>& kind);
std::optional<PrimitiveKind> label_kind_from_string(std::string_view name, bool& ok);

nlohmann::ordered_json label_to_json(const Label& label);
Label label_from_json(const nlohmann::json& value);

}  // namespace nsa
