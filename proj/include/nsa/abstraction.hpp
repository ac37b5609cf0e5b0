#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "nsa/grid.hpp"

namespace nsa {

// Abstraction schemes in search order.
enum class AbstractionKind : std::uint8_t {
  SameColor4,      // same-color 4-connected components, background excluded
  SameColor8,      // same-color 8-connected components, background excluded
  MultiColor4,     // 4-connected non-background components of any colors
  VerticalRuns,    // maximal vertical same-color runs
  HorizontalRuns,  // maximal horizontal same-color runs
  SinglePixel,     // every non-background pixel is a node
  WholeImage,      // one multi-color node holding every cell
};

inline constexpr int kNumAbstractionKinds = 7;

std::span<const AbstractionKind> list_abstractions();
std::string_view to_string(AbstractionKind kind);
std::optional<AbstractionKind> abstraction_from_string(std::string_view name);
bool is_lossless(AbstractionKind kind);

struct Pixel {
  int row = 0;
  int col = 0;
  Color color = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct BoundingBox {
  int top = 0;
  int left = 0;
  int bottom = -1;  // inclusive
  int right = -1;   // inclusive

  int height() const noexcept { return bottom - top + 1; }
  int width() const noexcept { return right - left + 1; }
  bool empty() const noexcept { return bottom < top || right < left; }
};

// Most nodes are a handful of pixels; those stay off the heap.
using PixelList = boost::container::small_vector<Pixel, 4>;

struct ObjectNode {
  int id = 0;
  PixelList pixels;
  // Color used by filters. For multi-color nodes this is the most frequent pixel
  // color (ties to the smaller code).
  Color color = 0;

  std::size_t size() const noexcept { return pixels.size(); }
  BoundingBox bounds() const;

  friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

enum class EdgeTag : std::uint8_t { Adjacent, Aligned };

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  EdgeTag tag = EdgeTag::Adjacent;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Nodes are kept sorted by ascending id; edges sorted by (a, b).
struct AbstractGraph {
  AbstractionKind kind = AbstractionKind::SameColor4;
  int height = 0;  // current canvas
  int width = 0;
  Color background = 0;
  std::vector<ObjectNode> nodes;
  std::vector<Edge> edges;

  const ObjectNode* find(int id) const;
  std::vector<int> node_ids() const;
  // Degree per node, indexed like `nodes`.
  std::vector<int> degrees() const;
  int next_id() const { return nodes.empty() ? 0 : nodes.back().id + 1; }

  friend bool operator==(const AbstractGraph&, const AbstractGraph&) = default;
};

// 0 unless absent from the grid, then the most frequent color (ties to smaller).
Color detect_background(const Grid& grid);

AbstractGraph build_abstraction(const Grid& grid, AbstractionKind kind);

// Background canvas, nodes painted in ascending id order, out-of-range pixels dropped.
Grid reconstruct_grid(const AbstractGraph& graph, int target_height, int target_width);
Grid reconstruct_grid(const AbstractGraph& graph);

}  // namespace nsa
