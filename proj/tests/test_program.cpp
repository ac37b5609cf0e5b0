#include <random>

#include "doctest.h"
#include "nsa/error.hpp"
#include "nsa/program.hpp"
#include "nsa/taskgen.hpp"
#include "support.hpp"

using namespace nsa;
using testing::grid;

namespace {

ProgramStep step(FilterExpr filter, PrimitiveKind kind, auto&& setter) {
  ProgramStep s{std::move(filter), {kind, {}}};
  setter(s.call.params);
  return s;
}

Program recolor_then_mirror() {
  Program p;
  p.abstraction = AbstractionKind::SameColor4;
  p.steps.push_back(step(FilterExpr::leaf(FilterKind::ByColor, {2}), PrimitiveKind::UpdateColor,
                         [](auto& q) { q.color = 3; }));
  p.steps.push_back(step(FilterExpr::match_all(), PrimitiveKind::MirrorGrid, [](auto& q) { q.axis = Axis::Vertical; }));
  return p;
}

ErrorCode parse_error(const char* text) {
  try {
    program_from_json(nlohmann::json::parse(text));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for " << text);
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("steps apply in order over one abstraction") {
  CHECK(apply_program(recolor_then_mirror(), grid({{2, 0, 1}})) == grid({{1, 0, 3}}));
  Program mirror_first = recolor_then_mirror();
  std::swap(mirror_first.steps[0], mirror_first.steps[1]);
  CHECK(apply_program(mirror_first, grid({{2, 0, 1}})) == grid({{1, 0, 3}}));
  CHECK(apply_program(mirror_first, grid({{2, 2}, {1, 0}})) == grid({{3, 3}, {0, 1}}));
}

TEST_CASE("the abstraction decides what a node is") {
  Program p;
  p.steps.push_back(step(FilterExpr::match_all(), PrimitiveKind::Fill, [](auto& q) { q.color = 3; }));
  const Grid in = grid({{1, 0}, {2, 2}});
  p.abstraction = AbstractionKind::SameColor4;
  CHECK(apply_program(p, in) == grid({{3, 0}, {3, 3}}));
  p.abstraction = AbstractionKind::MultiColor4;
  CHECK(apply_program(p, in) == grid({{3, 3}, {3, 3}}));
}

TEST_CASE("the filter is re-evaluated on the evolving graph") {
  Program p;
  p.abstraction = AbstractionKind::SameColor4;
  p.steps.push_back(step(FilterExpr::leaf(FilterKind::ByColor, {1}), PrimitiveKind::UpdateColor,
                         [](auto& q) { q.color = 2; }));
  p.steps.push_back(step(FilterExpr::leaf(FilterKind::ByColor, {2}), PrimitiveKind::RemoveNode, [](auto&) {}));
  CHECK(apply_program(p, grid({{1, 0, 2, 5}})) == grid({{0, 0, 0, 5}}));
}

TEST_CASE("apply_program propagates engine errors") {
  Program p;
  p.steps.push_back(step(FilterExpr::match_all(), PrimitiveKind::UpscaleGrid, [](auto& q) { q.count = 5; }));
  try {
    apply_program(p, Grid(30, 30, 1));
    FAIL("expected SizeCapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SizeCapExceeded);
  }
}

TEST_CASE("program JSON has a fixed layout and round-trips") {
  const auto text = program_to_json(recolor_then_mirror()).dump();
  CHECK(text ==
        R"({"abstraction":"same_color_4","steps":[)"
        R"({"filter":{"kind":"by_color","params":{"color":2}},"primitive":{"kind":"update_color","params":{"color":3}}},)"
        R"({"filter":{"kind":"all","params":{}},"primitive":{"kind":"mirror_grid","params":{"axis":"vertical"}}}]})");
  CHECK(program_from_json(nlohmann::json::parse(text)) == recolor_then_mirror());
}

TEST_CASE("sampled programs round-trip through JSON") {
  const auto sources = load_task_dir(testing::test_data_dir() + "/mini");
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto inputs = task_inputs(sources[i % sources.size()]);
    Program p;
    try {
      p = sample_program(rng, inputs, 1 + i % 3);
    } catch (const Error&) {
      continue;
    }
    const auto back = program_from_json(nlohmann::json::parse(program_to_json(p).dump()));
    CHECK(back == p);
    for (const auto& in : inputs) CHECK(apply_program(back, in) == apply_program(p, in));
  }
}

TEST_CASE("malformed programs are rejected") {
  CHECK(parse_error(R"({"abstraction":"same_color_4","steps":[]})") == ErrorCode::MalformedProgram);
  CHECK(parse_error(R"({"abstraction":"pixels","steps":[]})") == ErrorCode::MalformedProgram);
  CHECK(parse_error(R"({"abstraction":4,"steps":[]})") == ErrorCode::MalformedProgram);
  CHECK(parse_error(R"({"steps":[]})") == ErrorCode::MalformedProgram);
  CHECK(parse_error(R"({"abstraction":"same_color_4","steps":[{"filter":{"kind":"by_color","params":{"color":1}},)"
                    R"("primitive":{"kind":"rotate_grid","params":{"angle":90}}}]})") == ErrorCode::MalformedProgram);
  const std::string one =
      R"({"filter":{"kind":"all","params":{}},"primitive":{"kind":"rotate_grid","params":{"angle":90}}})";
  CHECK(parse_error(("{\"abstraction\":\"same_color_4\",\"steps\":[" + one + "," + one + "," + one + "," + one + "]}")
                        .c_str()) == ErrorCode::MalformedProgram);
  CHECK_NOTHROW(program_from_json(
      nlohmann::json::parse("{\"abstraction\":\"same_color_4\",\"steps\":[" + one + "," + one + "," + one + "]}")));
}

TEST_CASE("labels pad with no_trans") {
  const Label l = label_of(recolor_then_mirror());
  CHECK(l[0] == PrimitiveKind::UpdateColor);
  CHECK(l[1] == PrimitiveKind::MirrorGrid);
  CHECK_FALSE(l[2].has_value());
  CHECK(label_length(l) == 2);
  CHECK(well_formed(l));
  CHECK(label_to_json(l).dump() == R"(["update_color","mirror_grid","no_trans"])");
  CHECK(label_from_json(label_to_json(l)) == l);

  CHECK_FALSE(well_formed(Label{}));
  CHECK_FALSE(well_formed(Label{PrimitiveKind::Fill, std::nullopt, PrimitiveKind::Fill}));
  for (const char* bad : {R"(["no_trans","fill","no_trans"])", R"(["fill","no_trans"])",
                          R"(["fill","teleport","no_trans"])", R"(["no_trans","no_trans","no_trans"])",
                          R"([1,2,3])"})
    CHECK_THROWS_AS(label_from_json(nlohmann::json::parse(bad)), Error);
}
