#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nsa/abstraction.hpp"
#include "nsa/filters.hpp"

namespace nsa {

// ARGA base set (first 12) followed by the extended set.
enum class PrimitiveKind : std::uint8_t {
  UpdateColor,
  MoveNode,
  MoveNodeMax,
  ExtendNode,
  RotateNode,
  AddBorder,
  FillRectangle,
  HollowRectangle,
  MirrorNode,
  FlipNode,
  InsertNode,
  RemoveNode,
  Extract,
  Duplicate,
  UpscaleGrid,
  Fill,
  Magnet,
  Beam,
  Shift,
  MirrorDuplicate,
  RotateDuplicate,
  MirrorGrid,
  RotateGrid,
  Connect,
  Recolor,
  Truncate,
};

inline constexpr int kNumPrimitiveKinds = 26;
// Label-only sentinel for "no further primitive"; never executable.
inline constexpr std::string_view kNoTrans = "no_trans";

enum class PrimitiveScope : std::uint8_t { Node, Grid };

std::span<const PrimitiveKind> all_primitive_kinds();
std::string_view to_string(PrimitiveKind kind);
std::optional<PrimitiveKind> primitive_from_string(std::string_view name);
PrimitiveScope scope_of(PrimitiveKind kind);
// True for kinds that can change canvas dimensions.
bool can_resize(PrimitiveKind kind);

enum class Direction : std::uint8_t { Up, Down, Left, Right, UpLeft, UpRight, DownLeft, DownRight };
// Horizontal: along rows (left/right); Vertical: along columns (up/down).
// For mirroring, Vertical reflects across a vertical axis (left-right flip).
enum class Axis : std::uint8_t { Horizontal, Vertical, Both };
enum class Anchor : std::uint8_t { TopLeft, TopRight, BottomLeft, BottomRight };

// Flat parameter record; each kind reads only its own fields (see param_fields).
struct PrimitiveParams {
  Direction direction = Direction::Up;
  Axis axis = Axis::Horizontal;
  Anchor anchor = Anchor::TopLeft;
  Color color = 0;
  Color source_color = 0;
  int angle = 90;
  int count = 2;

  friend bool operator==(const PrimitiveParams&, const PrimitiveParams&) = default;
};

struct PrimitiveCall {
  PrimitiveKind kind = PrimitiveKind::UpdateColor;
  PrimitiveParams params;

  friend bool operator==(const PrimitiveCall&, const PrimitiveCall&) = default;
};

// Validates `params` for `kind`; throws Error(InvalidParams).
void validate(const PrimitiveCall& call);

// Node-level kinds rewrite the selected nodes (an empty selection returns the
// graph unchanged); grid-level kinds ignore the selection, transform the
// reconstructed canvas and re-abstract it under the same kind.
// Throws Error(SizeCapExceeded | InvalidParams).
AbstractGraph apply_primitive(const PrimitiveCall& call, const AbstractGraph& graph,
                              const NodeSet& selected);

// The canvas transform of a grid-level call on an already reconstructed grid.
// Throws Error(SizeCapExceeded | InvalidParams).
Grid apply_grid_primitive(const PrimitiveCall& call, const Grid& grid, Color background);

// Task evidence used to ground parameter enumeration.
struct ParamContext {
  std::vector<Color> palette;     // candidate target colors
  std::optional<int> height_ratio;  // every train output is k x input height
  std::optional<int> width_ratio;
  int max_side = kMaxArcSide;

  static ParamContext unconstrained();
  static ParamContext from_task(const Task& task);
};

std::vector<PrimitiveParams> enumerate_primitive_params(PrimitiveKind kind,
                                                        std::span<const AbstractGraph> graphs,
                                                        const ParamContext& context);

nlohmann::ordered_json call_to_json(const PrimitiveCall& call);
PrimitiveCall call_from_json(const nlohmann::json& value);

}  // namespace nsa
