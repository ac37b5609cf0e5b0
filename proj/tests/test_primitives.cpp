#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "nsa/error.hpp"
#include "nsa/primitives.hpp"
#include "nsa/program.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace nsa;
using testing::grid;

namespace {

PrimitiveCall call(PrimitiveKind kind, auto&& setter) {
  PrimitiveCall c{kind, {}};
  setter(c.params);
  return c;
}

// Applies to every node of the same-color abstraction, then reconstructs.
Grid run(const PrimitiveCall& c, const Grid& in) {
  const auto g = build_abstraction(in, AbstractionKind::SameColor4);
  return reconstruct_grid(apply_primitive(c, g, apply_filter(FilterExpr::match_all(), g)));
}

ErrorCode error_of(const PrimitiveCall& c, const Grid& in) {
  try {
    run(c, in);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("catalog has 26 kinds with total scope tagging") {
  CHECK(all_primitive_kinds().size() == 26);
  std::set<std::string_view> names;
  int grid_level = 0;
  for (auto k : all_primitive_kinds()) {
    names.insert(to_string(k));
    CHECK(primitive_from_string(to_string(k)) == k);
    grid_level += scope_of(k) == PrimitiveScope::Grid;
  }
  CHECK(names.size() == 26);
  CHECK(grid_level == 8);
  CHECK_FALSE(primitive_from_string(kNoTrans).has_value());
}

TEST_CASE("golden examples cover every kind") {
  const auto cases = testing::load_golden(testing::test_data_dir() + "/golden_primitives.json");
  std::set<PrimitiveKind> covered;
  for (const auto& c : cases) {
    CAPTURE(c.name);
    REQUIRE(c.program.steps.size() == 1);
    covered.insert(c.program.steps[0].call.kind);
    CHECK(apply_program(c.program, c.input) == c.output);
  }
  CHECK(covered.size() == 26);
}

TEST_CASE("update_color keeps node identity and shape") {
  const auto g = build_abstraction(grid({{2, 2, 0, 1}}), AbstractionKind::SameColor4);
  const auto out = apply_primitive(call(PrimitiveKind::UpdateColor, [](auto& p) { p.color = 3; }), g, {0});
  CHECK(out.nodes[0].color == 3);
  CHECK(out.nodes[0].size() == g.nodes[0].size());
  CHECK(out.nodes[1] == g.nodes[1]);
}

TEST_CASE("insert_node adds a node with a fresh id") {
  const auto g = build_abstraction(grid({{0, 0, 0}, {0, 7, 0}}), AbstractionKind::SameColor4);
  const auto out = apply_primitive(call(PrimitiveKind::InsertNode, [](auto& p) { p.anchor = Anchor::TopLeft; }), g,
                                   {0});
  CHECK(out.nodes.size() == 2);
  CHECK(out.nodes[1].id == 1);
  CHECK(reconstruct_grid(out) == grid({{7, 0, 0}, {0, 7, 0}}));
}

TEST_CASE("magnet matches a unit-step oracle") {
  // Oracle: repeatedly move any pixel one cell down while the cell below is free.
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Grid in = testing::random_grid(rng, 6, 3, 0.6);
    if (in.histogram()[0] == 0) continue;
    Grid expected = in;
    for (bool moved = true; moved;) {
      moved = false;
      for (int r = expected.height() - 2; r >= 0; --r)
        for (int c = 0; c < expected.width(); ++c)
          if (expected.at(r, c) != 0 && expected.at(r + 1, c) == 0) {
            expected.set(r + 1, c, expected.at(r, c));
            expected.set(r, c, 0);
            moved = true;
          }
    }
    CHECK(run(call(PrimitiveKind::Magnet, [](auto& p) { p.direction = Direction::Down; }), in) == expected);
  }
}

TEST_CASE("empty selections leave node-level graphs unchanged") {
  const auto g = build_abstraction(grid({{1, 0, 2}}), AbstractionKind::SameColor4);
  for (auto k : all_primitive_kinds()) {
    if (scope_of(k) == PrimitiveScope::Grid) continue;
    for (const auto& p : enumerate_primitive_params(k, std::span(&g, 1), ParamContext::unconstrained()))
      CHECK(apply_primitive({k, p}, g, {}) == g);
  }
}

TEST_CASE("errors: size cap and invalid parameters") {
  Grid big(30, 30, 1);
  CHECK(error_of(call(PrimitiveKind::UpscaleGrid, [](auto& p) { p.count = 5; }), big) == ErrorCode::SizeCapExceeded);
  CHECK(error_of(call(PrimitiveKind::Duplicate,
                      [](auto& p) {
                        p.axis = Axis::Both;
                        p.count = 6;
                      }),
                 big) == ErrorCode::SizeCapExceeded);
  const Grid small = grid({{1, 0}});
  CHECK(error_of(call(PrimitiveKind::RotateGrid, [](auto& p) { p.angle = 45; }), small) == ErrorCode::InvalidParams);
  CHECK(error_of(call(PrimitiveKind::Magnet, [](auto& p) { p.direction = Direction::UpLeft; }), small) ==
        ErrorCode::InvalidParams);
  CHECK(error_of(call(PrimitiveKind::Recolor,
                      [](auto& p) {
                        p.source_color = 1;
                        p.color = 1;
                      }),
                 small) == ErrorCode::InvalidParams);
  CHECK(error_of(call(PrimitiveKind::UpdateColor, [](auto& p) { p.color = 12; }), small) == ErrorCode::InvalidParams);
}

TEST_CASE("updating to the current color is the identity") {
  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Grid in = testing::random_grid(rng, 8, 4, 0.5);
    const auto g = build_abstraction(in, AbstractionKind::SameColor4);
    for (const auto& n : g.nodes)
      CHECK(reconstruct_grid(apply_primitive(call(PrimitiveKind::UpdateColor, [&](auto& p) { p.color = n.color; }),
                                             g, {n.id})) == in);
  }
}

TEST_CASE("involutions and inverses on random grids") {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Grid in = testing::random_grid(rng, 9, 10, 0.3);
    const auto kind = list_abstractions()[i % list_abstractions().size()];
    const Grid base = reconstruct_grid(build_abstraction(in, kind));
    auto twice = [&](const PrimitiveCall& a, const PrimitiveCall& b) {
      const auto g = build_abstraction(in, kind);
      return reconstruct_grid(apply_primitive(b, apply_primitive(a, g, {}), {}));
    };
    for (Axis axis : {Axis::Horizontal, Axis::Vertical, Axis::Both}) {
      const auto m = call(PrimitiveKind::MirrorGrid, [&](auto& p) { p.axis = axis; });
      CHECK(twice(m, m) == base);
    }
    const auto r = call(PrimitiveKind::RotateGrid, [](auto& p) { p.angle = 90; });
    auto g = build_abstraction(in, kind);
    for (int k = 0; k < 4; ++k) g = apply_primitive(r, g, {});
    CHECK(reconstruct_grid(g) == base);

    const Color bg = detect_background(base);
    bool first_column_clear = true;
    for (int row = 0; row < base.height(); ++row) first_column_clear = first_column_clear && base.at(row, 0) == bg;
    if (first_column_clear) {
      const auto left = call(PrimitiveKind::Shift, [](auto& p) { p.direction = Direction::Left; });
      const auto right = call(PrimitiveKind::Shift, [](auto& p) { p.direction = Direction::Right; });
      CHECK(twice(left, right) == base);
    }
  }
}

TEST_CASE("parameter enumeration examples") {
  const auto g = build_abstraction(grid({{1, 0, 4}}), AbstractionKind::SameColor4);
  const std::span<const AbstractGraph> graphs(&g, 1);
  const auto angles = enumerate_primitive_params(PrimitiveKind::RotateGrid, graphs, ParamContext::unconstrained());
  REQUIRE(angles.size() == 3);
  CHECK(angles[0].angle == 90);
  CHECK(angles[1].angle == 180);
  CHECK(angles[2].angle == 270);

  // Outputs three times as wide as the inputs.
  const Task t = testing::make_task({{grid({{1, 0}}), grid({{1, 0, 1, 0, 1, 0}})},
                                     {grid({{2}, {0}}), grid({{2, 2, 2}, {0, 0, 0}})}},
                                    {grid({{3}})});
  const auto ctx = ParamContext::from_task(t);
  REQUIRE(ctx.width_ratio == 3);
  REQUIRE(ctx.height_ratio == 1);
  const auto dup = enumerate_primitive_params(PrimitiveKind::Duplicate, graphs, ctx);
  REQUIRE_FALSE(dup.empty());
  CHECK(dup[0].axis == Axis::Horizontal);
  CHECK(dup[0].count == 3);

  const Task colors = testing::make_task({{grid({{1, 0, 4}}), grid({{2, 0, 4}})}}, {grid({{1}})});
  const auto palette_ctx = ParamContext::from_task(colors);
  std::set<int> allowed = {0, 2, 4};
  for (const auto& p : enumerate_primitive_params(PrimitiveKind::UpdateColor, graphs, palette_ctx))
    CHECK(allowed.count(p.color) == 1);
}

TEST_CASE("every kind enumerates at least one record on a non-degenerate graph") {
  const auto g = build_abstraction(grid({{1, 0, 2}, {0, 0, 0}, {3, 3, 0}}), AbstractionKind::SameColor4);
  for (auto k : all_primitive_kinds()) {
    CAPTURE(to_string(k));
    const auto params = enumerate_primitive_params(k, std::span(&g, 1), ParamContext::unconstrained());
    CHECK_FALSE(params.empty());
    for (const auto& p : params) CHECK_NOTHROW(validate({k, p}));
  }
}

TEST_CASE("call JSON round-trips for every enumerated record") {
  const auto g = build_abstraction(grid({{1, 0, 2}, {0, 0, 0}, {3, 3, 0}}), AbstractionKind::SameColor4);
  for (auto k : all_primitive_kinds())
    for (const auto& p : enumerate_primitive_params(k, std::span(&g, 1), ParamContext::unconstrained())) {
      const PrimitiveCall c{k, p};
      CHECK(call_from_json(nlohmann::json::parse(call_to_json(c).dump())) == c);
    }
  CHECK(call_to_json(call(PrimitiveKind::UpscaleGrid, [](auto& p) { p.count = 2; })).dump() ==
        R"({"kind":"upscale_grid","params":{"factor":2}})");
  CHECK_THROWS_AS(call_from_json(nlohmann::json::parse(R"({"kind":"teleport","params":{}})")), Error);
  CHECK_THROWS_AS(call_from_json(nlohmann::json::parse(R"({"kind":"update_color","params":{}})")), Error);
  CHECK_THROWS_AS(call_from_json(nlohmann::json::parse(R"({"kind":"rotate_grid","params":{"angle":45}})")), Error);
}
