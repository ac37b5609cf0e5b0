#include "nsa/primitives.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<PrimitiveKind, kNumPrimitiveKinds> kAllKinds = [] {
  std::array<PrimitiveKind, kNumPrimitiveKinds> a{};
  for (int i = 0; i < kNumPrimitiveKinds; ++i) a[i] = static_cast<PrimitiveKind>(i);
  return a;
}();

constexpr std::array<std::string_view, kNumPrimitiveKinds> kKindNames = {
    "update_color",     "move_node",        "move_node_max", "extend_node", "rotate_node",
    "add_border",       "fill_rectangle",   "hollow_rectangle", "mirror_node", "flip_node",
    "insert_node",      "remove_node",      "extract",       "duplicate",   "upscale_grid",
    "fill",             "magnet",           "beam",          "shift",       "mirror_duplicate",
    "rotate_duplicate", "mirror_grid",      "rotate_grid",   "connect",     "recolor",
    "truncate",
};

constexpr std::array<std::string_view, 8> kDirectionNames = {
    "up", "down", "left", "right", "up_left", "up_right", "down_left", "down_right"};
constexpr std::array<std::string_view, 3> kAxisNames = {"horizontal", "vertical", "both"};
constexpr std::array<std::string_view, 4> kAnchorNames = {"top_left", "top_right", "bottom_left",
                                                          "bottom_right"};

constexpr std::array<Direction, 4> kOrthogonal = {Direction::Up, Direction::Down, Direction::Left,
                                                  Direction::Right};
constexpr std::array<Direction, 8> kAllDirections = {
    Direction::Up,     Direction::Down,      Direction::Left,     Direction::Right,
    Direction::UpLeft, Direction::UpRight, Direction::DownLeft, Direction::DownRight};

// Which PrimitiveParams fields a kind reads.
enum Field : unsigned {
  kDirection = 1u << 0,
  kAxis = 1u << 1,
  kAnchor = 1u << 2,
  kColor = 1u << 3,
  kSourceColor = 1u << 4,
  kAngle = 1u << 5,
  kCount = 1u << 6,
};

unsigned fields_of(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::UpdateColor:
    case PrimitiveKind::AddBorder:
    case PrimitiveKind::FillRectangle:
    case PrimitiveKind::HollowRectangle:
    case PrimitiveKind::Fill:
    case PrimitiveKind::Connect: return kColor;
    case PrimitiveKind::MoveNode:
    case PrimitiveKind::MoveNodeMax:
    case PrimitiveKind::ExtendNode:
    case PrimitiveKind::MirrorNode:
    case PrimitiveKind::Magnet:
    case PrimitiveKind::Shift:
    case PrimitiveKind::MirrorDuplicate: return kDirection;
    case PrimitiveKind::Beam: return kDirection | kColor;
    case PrimitiveKind::RotateNode:
    case PrimitiveKind::RotateGrid: return kAngle;
    case PrimitiveKind::FlipNode:
    case PrimitiveKind::MirrorGrid: return kAxis;
    case PrimitiveKind::InsertNode: return kAnchor;
    case PrimitiveKind::Duplicate: return kAxis | kCount;
    case PrimitiveKind::UpscaleGrid: return kCount;
    case PrimitiveKind::RotateDuplicate: return kAxis | kAngle;
    case PrimitiveKind::Recolor: return kSourceColor | kColor;
    case PrimitiveKind::RemoveNode:
    case PrimitiveKind::Extract:
    case PrimitiveKind::Truncate: return 0;
  }
  return 0;
}

PrimitiveParams canonical(PrimitiveKind kind, PrimitiveParams p) {
  const PrimitiveParams d;
  const unsigned f = fields_of(kind);
  if (!(f & kDirection)) p.direction = d.direction;
  if (!(f & kAxis)) p.axis = d.axis;
  if (!(f & kAnchor)) p.anchor = d.anchor;
  if (!(f & kColor)) p.color = d.color;
  if (!(f & kSourceColor)) p.source_color = d.source_color;
  if (!(f & kAngle)) p.angle = d.angle;
  if (!(f & kCount)) p.count = d.count;
  return p;
}

bool is_orthogonal(Direction d) { return static_cast<int>(d) < 4; }

std::pair<int, int> delta(Direction d) {
  switch (d) {
    case Direction::Up: return {-1, 0};
    case Direction::Down: return {1, 0};
    case Direction::Left: return {0, -1};
    case Direction::Right: return {0, 1};
    case Direction::UpLeft: return {-1, -1};
    case Direction::UpRight: return {-1, 1};
    case Direction::DownLeft: return {1, -1};
    case Direction::DownRight: return {1, 1};
  }
  return {0, 0};
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidParams, what); }

void check_cap(int h, int w) {
  if (h > kEngineSizeCap || w > kEngineSizeCap)
    throw Error(ErrorCode::SizeCapExceeded,
                std::to_string(h) + "x" + std::to_string(w) + " exceeds engine cap");
  if (h <= 0 || w <= 0) invalid("empty canvas");
}

// ---------------------------------------------------------------- grid level

Grid mirror(const Grid& g, Axis axis) {
  Grid out(g.height(), g.width());
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c) {
      const int rr = axis == Axis::Vertical ? r : g.height() - 1 - r;
      const int cc = axis == Axis::Horizontal ? c : g.width() - 1 - c;
      out.set(rr, cc, g.at(r, c));
    }
  return out;
}

// Clockwise.
Grid rotate(const Grid& g, int angle) {
  Grid out = g;
  for (int turns = (angle / 90) % 4; turns > 0; --turns) {
    Grid next(out.width(), out.height());
    for (int r = 0; r < out.height(); ++r)
      for (int c = 0; c < out.width(); ++c) next.set(c, out.height() - 1 - r, out.at(r, c));
    out = std::move(next);
  }
  return out;
}

Grid concat(const Grid& a, const Grid& b, bool horizontal) {
  if (horizontal ? a.height() != b.height() : a.width() != b.width())
    invalid("concatenated grids differ in size");
  const int h = horizontal ? a.height() : a.height() + b.height();
  const int w = horizontal ? a.width() + b.width() : a.width();
  check_cap(h, w);
  Grid out(h, w);
  for (int r = 0; r < a.height(); ++r)
    for (int c = 0; c < a.width(); ++c) out.set(r, c, a.at(r, c));
  const int r0 = horizontal ? 0 : a.height();
  const int c0 = horizontal ? a.width() : 0;
  for (int r = 0; r < b.height(); ++r)
    for (int c = 0; c < b.width(); ++c) out.set(r0 + r, c0 + c, b.at(r, c));
  return out;
}

Grid tile(const Grid& g, int rows, int cols) {
  check_cap(g.height() * rows, g.width() * cols);
  Grid out(g.height() * rows, g.width() * cols);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) out.set(r, c, g.at(r % g.height(), c % g.width()));
  return out;
}

Grid upscale(const Grid& g, int factor) {
  check_cap(g.height() * factor, g.width() * factor);
  Grid out(g.height() * factor, g.width() * factor);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) out.set(r, c, g.at(r / factor, c / factor));
  return out;
}

Grid shift(const Grid& g, Direction d, Color bg) {
  const auto [dr, dc] = delta(d);
  Grid out(g.height(), g.width(), bg);
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      if (out.contains(r + dr, c + dc)) out.set(r + dr, c + dc, g.at(r, c));
  return out;
}

Grid crop(const Grid& g, const BoundingBox& box) {
  Grid out(box.height(), box.width());
  for (int r = 0; r < box.height(); ++r)
    for (int c = 0; c < box.width(); ++c) out.set(r, c, g.at(box.top + r, box.left + c));
  return out;
}

Grid transform_canvas(const PrimitiveCall& call, const Grid& g, Color bg) {
  const auto& p = call.params;
  switch (call.kind) {
    case PrimitiveKind::Duplicate:
      return tile(g, p.axis == Axis::Horizontal ? 1 : p.count,
                  p.axis == Axis::Vertical ? 1 : p.count);
    case PrimitiveKind::UpscaleGrid: return upscale(g, p.count);
    case PrimitiveKind::Shift: return shift(g, p.direction, bg);
    case PrimitiveKind::MirrorDuplicate: {
      const bool horizontal = p.direction == Direction::Left || p.direction == Direction::Right;
      const Grid m = mirror(g, horizontal ? Axis::Vertical : Axis::Horizontal);
      const bool first = p.direction == Direction::Right || p.direction == Direction::Down;
      return first ? concat(g, m, horizontal) : concat(m, g, horizontal);
    }
    case PrimitiveKind::RotateDuplicate: {
      if (p.axis == Axis::Both) {
        if (g.height() != g.width()) invalid("rotate_duplicate quad needs a square grid");
        return concat(concat(g, rotate(g, 90), true), concat(rotate(g, 270), rotate(g, 180), true),
                      false);
      }
      return concat(g, rotate(g, p.angle), p.axis == Axis::Horizontal);
    }
    case PrimitiveKind::MirrorGrid: return mirror(g, p.axis);
    case PrimitiveKind::RotateGrid: return rotate(g, p.angle);
    case PrimitiveKind::Recolor: {
      Grid out = g;
      for (int r = 0; r < g.height(); ++r)
        for (int c = 0; c < g.width(); ++c)
          if (g.at(r, c) == p.source_color) out.set(r, c, p.color);
      return out;
    }
    default: break;
  }
  invalid("not a grid-level primitive");
}

// ---------------------------------------------------------------- node level

std::int64_t cell_key(int r, int c) {
  return (static_cast<std::int64_t>(r) << 32) | static_cast<std::uint32_t>(c);
}

// One pixel per cell (the last occurrence wins), raster order.
void normalize(ObjectNode& node) {
  auto& px = node.pixels;
  auto before = [](const Pixel& a, const Pixel& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  };
  auto same_cell = [](const Pixel& a, const Pixel& b) { return a.row == b.row && a.col == b.col; };
  if (std::adjacent_find(px.begin(), px.end(), [&](const Pixel& a, const Pixel& b) {
        return !before(a, b);
      }) == px.end())
    return;
  std::stable_sort(px.begin(), px.end(), before);
  // Within a run of equal cells the last original occurrence comes last.
  std::size_t out = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (i + 1 < px.size() && same_cell(px[i], px[i + 1])) continue;
    px[out++] = px[i];
  }
  px.resize(out);
}

// Per-cell count of non-background pixels over all nodes.
struct Occupancy {
  int h, w;
  std::vector<int> count;

  Occupancy(const AbstractGraph& g) : h(g.height), w(g.width), count(std::size_t(h) * w, 0) {
    for (const auto& n : g.nodes) add(n, g.background, 1);
  }
  bool inside(int r, int c) const { return r >= 0 && c >= 0 && r < h && c < w; }
  int& at(int r, int c) { return count[std::size_t(r) * w + c]; }
  bool occupied(int r, int c) { return inside(r, c) && at(r, c) > 0; }
  void add(const ObjectNode& n, Color bg, int sign) {
    for (const auto& p : n.pixels)
      if (p.color != bg && inside(p.row, p.col)) at(p.row, p.col) += sign;
  }
};

bool is_selected(const NodeSet& selected, int id) {
  return std::binary_search(selected.begin(), selected.end(), id);
}

// Leading-edge coordinate, larger = closer to the border being moved towards.
int leading(const ObjectNode& n, Direction d) {
  const auto box = n.bounds();
  const auto [dr, dc] = delta(d);
  int v = 0;
  if (dr > 0) v += box.bottom;
  if (dr < 0) v -= box.top;
  if (dc > 0) v += box.right;
  if (dc < 0) v -= box.left;
  return v;
}

void move_max(AbstractGraph& g, const NodeSet& selected, Direction d) {
  const auto [dr, dc] = delta(d);
  Occupancy occ(g);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (is_selected(selected, g.nodes[i].id)) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return leading(g.nodes[a], d) > leading(g.nodes[b], d);
  });
  const int limit = std::max(g.height, g.width);
  for (std::size_t idx : order) {
    ObjectNode& n = g.nodes[idx];
    occ.add(n, g.background, -1);
    int steps = 0;
    for (; steps < limit; ++steps) {
      const int k = steps + 1;
      const bool blocked = std::any_of(n.pixels.begin(), n.pixels.end(), [&](const Pixel& p) {
        const int r = p.row + dr * k, c = p.col + dc * k;
        return !occ.inside(r, c) || (p.color != g.background && occ.at(r, c) > 0);
      });
      if (blocked) break;
    }
    for (auto& p : n.pixels) {
      p.row += dr * steps;
      p.col += dc * steps;
    }
    occ.add(n, g.background, 1);
  }
}

void magnet(AbstractGraph& g, const NodeSet& selected, Direction d) {
  const auto [dr, dc] = delta(d);
  Occupancy occ(g);
  struct Ref {
    std::size_t node;
    std::size_t pixel;
  };
  std::vector<Ref> movers;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (!is_selected(selected, g.nodes[i].id)) continue;
    auto& n = g.nodes[i];
    // Stationary pixels first so moved pixels win in normalize().
    std::stable_partition(n.pixels.begin(), n.pixels.end(), [&](const Pixel& p) {
      return p.color == g.background || !occ.inside(p.row, p.col);
    });
    for (std::size_t j = 0; j < n.pixels.size(); ++j) {
      const Pixel& p = n.pixels[j];
      if (p.color != g.background && occ.inside(p.row, p.col)) {
        movers.push_back({i, j});
        occ.at(p.row, p.col) -= 1;
      }
    }
  }
  auto lead = [&](const Ref& r) {
    const Pixel& p = g.nodes[r.node].pixels[r.pixel];
    return p.row * dr + p.col * dc;
  };
  std::stable_sort(movers.begin(), movers.end(),
                   [&](const Ref& a, const Ref& b) { return lead(a) > lead(b); });
  for (const auto& m : movers) {
    Pixel& p = g.nodes[m.node].pixels[m.pixel];
    while (occ.inside(p.row + dr, p.col + dc) && occ.at(p.row + dr, p.col + dc) == 0) {
      p.row += dr;
      p.col += dc;
    }
    occ.at(p.row, p.col) += 1;
  }
}

void extend(AbstractGraph& g, const NodeSet& selected, Direction d) {
  const auto [dr, dc] = delta(d);
  Occupancy occ(g);
  for (auto& n : g.nodes) {
    if (!is_selected(selected, n.id)) continue;
    occ.add(n, g.background, -1);
    const std::size_t original = n.pixels.size();
    for (std::size_t i = 0; i < original; ++i) {
      const Pixel p = n.pixels[i];
      if (p.color == g.background) continue;
      for (int r = p.row + dr, c = p.col + dc; occ.inside(r, c) && occ.at(r, c) == 0;
           r += dr, c += dc)
        n.pixels.push_back({r, c, p.color});
    }
    normalize(n);
    occ.add(n, g.background, 1);
  }
}

void beam(AbstractGraph& g, const NodeSet& selected, Direction d, Color color) {
  const auto [dr, dc] = delta(d);
  Occupancy occ(g);
  for (auto& n : g.nodes) {
    if (!is_selected(selected, n.id) || n.pixels.empty()) continue;
    const auto box = n.bounds();
    PixelList added;
    const bool vertical = dr != 0;
    const int lo = vertical ? box.left : box.top;
    const int hi = vertical ? box.right : box.bottom;
    for (int lane = lo; lane <= hi; ++lane) {
      int r = vertical ? (dr < 0 ? box.top - 1 : box.bottom + 1) : lane;
      int c = vertical ? lane : (dc < 0 ? box.left - 1 : box.right + 1);
      for (; occ.inside(r, c) && occ.at(r, c) == 0; r += dr, c += dc) added.push_back({r, c, color});
    }
    for (const auto& p : added) occ.at(p.row, p.col) += 1;
    n.pixels.insert(n.pixels.end(), added.begin(), added.end());
    normalize(n);
  }
}

// Lines between consecutive selected nodes sharing a row or column with only
// background in between; collected into one new node.
void connect(AbstractGraph& g, const NodeSet& selected, Color color) {
  std::vector<int> owner(std::size_t(g.height) * g.width, -1);
  for (const auto& n : g.nodes)
    for (const auto& p : n.pixels)
      if (p.color != g.background && p.row >= 0 && p.col >= 0 && p.row < g.height &&
          p.col < g.width)
        owner[std::size_t(p.row) * g.width + p.col] = n.id;
  auto own = [&](int r, int c) { return owner[std::size_t(r) * g.width + c]; };
  PixelList line;
  auto sweep = [&](int outer, int inner, bool rows) {
    for (int a = 0; a < outer; ++a) {
      int prev = -1, prev_pos = -1;
      for (int b = 0; b < inner; ++b) {
        const int o = rows ? own(a, b) : own(b, a);
        if (o < 0) continue;
        if (prev >= 0 && prev != o && b - prev_pos > 1 && is_selected(selected, prev) &&
            is_selected(selected, o))
          for (int k = prev_pos + 1; k < b; ++k)
            line.push_back(rows ? Pixel{a, k, color} : Pixel{k, a, color});
        prev = o;
        prev_pos = b;
      }
    }
  };
  sweep(g.height, g.width, true);
  sweep(g.width, g.height, false);
  if (line.empty()) return;
  ObjectNode node;
  node.id = g.next_id();
  node.color = color;
  node.pixels = std::move(line);
  normalize(node);
  g.nodes.push_back(std::move(node));
}

void rotate_node(ObjectNode& n, int angle) {
  const auto box = n.bounds();
  for (auto& p : n.pixels) {
    const int r = p.row - box.top, c = p.col - box.left;
    switch (angle) {
      case 90: p.row = box.top + c; p.col = box.left + box.height() - 1 - r; break;
      case 180: p.row = box.top + box.height() - 1 - r; p.col = box.left + box.width() - 1 - c; break;
      case 270: p.row = box.top + box.width() - 1 - c; p.col = box.left + r; break;
      default: break;
    }
  }
  normalize(n);
}

void flip_node(ObjectNode& n, Axis axis) {
  const auto box = n.bounds();
  for (auto& p : n.pixels) {
    if (axis != Axis::Horizontal) p.col = box.left + box.right - p.col;
    if (axis != Axis::Vertical) p.row = box.top + box.bottom - p.row;
  }
  normalize(n);
}

void mirror_node(ObjectNode& n, Direction d) {
  const auto box = n.bounds();
  const std::size_t original = n.pixels.size();
  for (std::size_t i = 0; i < original; ++i) {
    Pixel p = n.pixels[i];
    switch (d) {
      case Direction::Right: p.col = 2 * box.right + 1 - p.col; break;
      case Direction::Left: p.col = 2 * box.left - 1 - p.col; break;
      case Direction::Down: p.row = 2 * box.bottom + 1 - p.row; break;
      case Direction::Up: p.row = 2 * box.top - 1 - p.row; break;
      default: break;
    }
    n.pixels.push_back(p);
  }
  normalize(n);
}

// Cells of the box not yet in the node are appended with `color`; with
// `overwrite`, existing pixels in `area` are recolored as well.
void paint_box(ObjectNode& n, const BoundingBox& area, Color color, bool overwrite) {
  std::unordered_map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < n.pixels.size(); ++i)
    index[cell_key(n.pixels[i].row, n.pixels[i].col)] = i;
  for (int r = area.top; r <= area.bottom; ++r)
    for (int c = area.left; c <= area.right; ++c) {
      auto it = index.find(cell_key(r, c));
      if (it == index.end())
        n.pixels.push_back({r, c, color});
      else if (overwrite)
        n.pixels[it->second].color = color;
    }
  normalize(n);
}

void add_border(ObjectNode& n, Color color, int h, int w) {
  const auto box = n.bounds();
  for (int r = box.top - 1; r <= box.bottom + 1; ++r)
    for (int c = box.left - 1; c <= box.right + 1; ++c) {
      const bool ring = r == box.top - 1 || r == box.bottom + 1 || c == box.left - 1 ||
                        c == box.right + 1;
      if (ring && r >= 0 && c >= 0 && r < h && c < w) n.pixels.push_back({r, c, color});
    }
  normalize(n);
}

void insert_copy(AbstractGraph& g, const NodeSet& selected, Anchor anchor) {
  std::vector<ObjectNode> copies;
  int next = g.next_id();
  for (const auto& n : g.nodes) {
    if (!is_selected(selected, n.id)) continue;
    const auto box = n.bounds();
    const bool top = anchor == Anchor::TopLeft || anchor == Anchor::TopRight;
    const bool left = anchor == Anchor::TopLeft || anchor == Anchor::BottomLeft;
    const int dr = top ? -box.top : g.height - 1 - box.bottom;
    const int dc = left ? -box.left : g.width - 1 - box.right;
    ObjectNode copy = n;
    copy.id = next++;
    for (auto& p : copy.pixels) {
      p.row += dr;
      p.col += dc;
    }
    copies.push_back(std::move(copy));
  }
  for (auto& c : copies) g.nodes.push_back(std::move(c));
}

void remove_nodes(AbstractGraph& g, const NodeSet& selected) {
  std::erase_if(g.nodes, [&](const ObjectNode& n) { return is_selected(selected, n.id); });
  std::erase_if(g.edges, [&](const Edge& e) {
    return is_selected(selected, e.a) || is_selected(selected, e.b);
  });
}

BoundingBox content_box(const Grid& g, Color bg) {
  BoundingBox box{g.height(), g.width(), -1, -1};
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      if (g.at(r, c) != bg) {
        box.top = std::min(box.top, r);
        box.bottom = std::max(box.bottom, r);
        box.left = std::min(box.left, c);
        box.right = std::max(box.right, c);
      }
  return box;
}

AbstractGraph extract(const AbstractGraph& g, const NodeSet& selected) {
  BoundingBox box{g.height, g.width, -1, -1};
  for (const auto& n : g.nodes) {
    if (!is_selected(selected, n.id)) continue;
    for (const auto& p : n.pixels) {
      if (p.row < 0 || p.col < 0 || p.row >= g.height || p.col >= g.width) continue;
      box.top = std::min(box.top, p.row);
      box.bottom = std::max(box.bottom, p.row);
      box.left = std::min(box.left, p.col);
      box.right = std::max(box.right, p.col);
    }
  }
  if (box.empty()) invalid("extract: selection has no pixels on the canvas");
  return build_abstraction(crop(reconstruct_grid(g), box), g.kind);
}

AbstractGraph truncate(const AbstractGraph& g, const NodeSet& selected) {
  AbstractGraph rest = g;
  remove_nodes(rest, selected);
  const Grid canvas = reconstruct_grid(rest);
  const BoundingBox box = content_box(canvas, rest.background);
  if (box.empty()) invalid("truncate: nothing left on the canvas");
  return build_abstraction(crop(canvas, box), g.kind);
}

template <typename E, std::size_t N>
E enum_from(const std::array<std::string_view, N>& names, const json& v, const char* what) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    for (std::size_t i = 0; i < N; ++i)
      if (names[i] == s) return static_cast<E>(i);
  }
  throw Error(ErrorCode::MalformedProgram, std::string("bad ") + what);
}

}  // namespace

std::span<const PrimitiveKind> all_primitive_kinds() { return kAllKinds; }

std::string_view to_string(PrimitiveKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<PrimitiveKind> primitive_from_string(std::string_view name) {
  for (int i = 0; i < kNumPrimitiveKinds; ++i)
    if (kKindNames[i] == name) return static_cast<PrimitiveKind>(i);
  return std::nullopt;
}

PrimitiveScope scope_of(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Duplicate:
    case PrimitiveKind::UpscaleGrid:
    case PrimitiveKind::Shift:
    case PrimitiveKind::MirrorDuplicate:
    case PrimitiveKind::RotateDuplicate:
    case PrimitiveKind::MirrorGrid:
    case PrimitiveKind::RotateGrid:
    case PrimitiveKind::Recolor: return PrimitiveScope::Grid;
    default: return PrimitiveScope::Node;
  }
}

bool can_resize(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Extract:
    case PrimitiveKind::Truncate:
    case PrimitiveKind::Duplicate:
    case PrimitiveKind::UpscaleGrid:
    case PrimitiveKind::MirrorDuplicate:
    case PrimitiveKind::RotateDuplicate:
    case PrimitiveKind::RotateGrid: return true;
    default: return false;
  }
}

void validate(const PrimitiveCall& call) {
  const auto& p = call.params;
  const unsigned f = fields_of(call.kind);
  if ((f & kColor) && p.color >= kNumColors) invalid("color out of range");
  if ((f & kSourceColor) && p.source_color >= kNumColors) invalid("source color out of range");
  if ((f & kAngle) && p.angle != 90 && p.angle != 180 && p.angle != 270) invalid("bad angle");
  if ((f & kCount) && (p.count < 1 || p.count > kEngineSizeCap)) invalid("bad count");
  switch (call.kind) {
    case PrimitiveKind::MoveNodeMax:
    case PrimitiveKind::MirrorNode:
    case PrimitiveKind::Magnet:
    case PrimitiveKind::Beam:
    case PrimitiveKind::Shift:
    case PrimitiveKind::MirrorDuplicate:
      if (!is_orthogonal(p.direction)) invalid("direction must be orthogonal");
      break;
    case PrimitiveKind::FlipNode:
      break;
    case PrimitiveKind::RotateDuplicate:
      if (p.axis == Axis::Both && p.angle != 90) invalid("rotate_duplicate quad uses angle 90");
      break;
    case PrimitiveKind::Recolor:
      if (p.source_color == p.color) invalid("recolor to the same color");
      break;
    default: break;
  }
}

Grid apply_grid_primitive(const PrimitiveCall& call, const Grid& grid, Color background) {
  validate(call);
  Grid out = transform_canvas(call, grid, background);
  check_cap(out.height(), out.width());
  return out;
}

AbstractGraph apply_primitive(const PrimitiveCall& call, const AbstractGraph& graph,
                              const NodeSet& selected) {
  validate(call);
  const auto& p = call.params;
  if (scope_of(call.kind) == PrimitiveScope::Grid)
    return build_abstraction(apply_grid_primitive(call, reconstruct_grid(graph), graph.background),
                             graph.kind);
  if (selected.empty()) return graph;
  if (call.kind == PrimitiveKind::Extract) return extract(graph, selected);
  if (call.kind == PrimitiveKind::Truncate) return truncate(graph, selected);

  AbstractGraph g = graph;
  auto for_selected = [&](auto&& fn) {
    auto next = selected.begin();
    for (auto& n : g.nodes) {
      while (next != selected.end() && *next < n.id) ++next;
      if (next == selected.end()) break;
      if (*next == n.id) fn(n);
    }
  };
  switch (call.kind) {
    case PrimitiveKind::UpdateColor:
      for_selected([&](ObjectNode& n) {
        n.color = p.color;
        for (auto& px : n.pixels) px.color = p.color;
      });
      break;
    case PrimitiveKind::MoveNode: {
      const auto [dr, dc] = delta(p.direction);
      for_selected([&](ObjectNode& n) {
        for (auto& px : n.pixels) {
          px.row += dr;
          px.col += dc;
        }
      });
      break;
    }
    case PrimitiveKind::MoveNodeMax: move_max(g, selected, p.direction); break;
    case PrimitiveKind::ExtendNode: extend(g, selected, p.direction); break;
    case PrimitiveKind::RotateNode:
      for_selected([&](ObjectNode& n) { rotate_node(n, p.angle); });
      break;
    case PrimitiveKind::AddBorder:
      for_selected([&](ObjectNode& n) { add_border(n, p.color, g.height, g.width); });
      break;
    case PrimitiveKind::FillRectangle:
      for_selected([&](ObjectNode& n) { paint_box(n, n.bounds(), p.color, false); });
      break;
    case PrimitiveKind::HollowRectangle:
      for_selected([&](ObjectNode& n) {
        BoundingBox inner = n.bounds();
        ++inner.top, ++inner.left, --inner.bottom, --inner.right;
        if (!inner.empty()) paint_box(n, inner, p.color, true);
      });
      break;
    case PrimitiveKind::MirrorNode:
      for_selected([&](ObjectNode& n) { mirror_node(n, p.direction); });
      break;
    case PrimitiveKind::FlipNode:
      for_selected([&](ObjectNode& n) { flip_node(n, p.axis); });
      break;
    case PrimitiveKind::InsertNode: insert_copy(g, selected, p.anchor); break;
    case PrimitiveKind::RemoveNode: remove_nodes(g, selected); break;
    case PrimitiveKind::Fill:
      for_selected([&](ObjectNode& n) {
        const BoundingBox box = n.bounds();
        n.pixels.clear();
        for (int r = box.top; r <= box.bottom; ++r)
          for (int c = box.left; c <= box.right; ++c) n.pixels.push_back({r, c, p.color});
        n.color = p.color;
      });
      break;
    case PrimitiveKind::Magnet:
      magnet(g, selected, p.direction);
      for_selected([](ObjectNode& n) { normalize(n); });
      break;
    case PrimitiveKind::Beam: beam(g, selected, p.direction, p.color); break;
    case PrimitiveKind::Connect: connect(g, selected, p.color); break;
    default: invalid("unhandled node-level primitive");
  }
  return g;
}

ParamContext ParamContext::unconstrained() {
  ParamContext ctx;
  for (int c = 0; c < kNumColors; ++c) ctx.palette.push_back(static_cast<Color>(c));
  return ctx;
}

ParamContext ParamContext::from_task(const Task& task) {
  ParamContext ctx;
  std::array<bool, kNumColors> seen{};
  for (const auto& ex : task.train)
    for (Color c : ex.output.cells()) seen[c] = true;
  for (int c = 0; c < kNumColors; ++c)
    if (seen[c]) ctx.palette.push_back(static_cast<Color>(c));

  auto ratio = [&](auto in_dim, auto out_dim) -> std::optional<int> {
    std::optional<int> k;
    for (const auto& ex : task.train) {
      const int a = in_dim(ex), b = out_dim(ex);
      if (b % a != 0) return std::nullopt;
      if (k && *k != b / a) return std::nullopt;
      k = b / a;
    }
    return k;
  };
  ctx.height_ratio = ratio([](const Example& e) { return e.input.height(); },
                           [](const Example& e) { return e.output.height(); });
  ctx.width_ratio = ratio([](const Example& e) { return e.input.width(); },
                          [](const Example& e) { return e.output.width(); });
  return ctx;
}

std::vector<PrimitiveParams> enumerate_primitive_params(PrimitiveKind kind,
                                                        std::span<const AbstractGraph> graphs,
                                                        const ParamContext& ctx) {
  std::vector<PrimitiveParams> out;
  int max_h = 0, max_w = 0;
  bool all_square = !graphs.empty();
  std::array<bool, kNumColors> present{};
  for (const auto& g : graphs) {
    max_h = std::max(max_h, g.height);
    max_w = std::max(max_w, g.width);
    all_square = all_square && g.height == g.width;
    present[g.background] = true;
    for (const auto& n : g.nodes)
      for (const auto& px : n.pixels) present[px.color] = true;
  }
  auto fits = [&](int h, int w) { return h <= ctx.max_side && w <= ctx.max_side; };
  auto with = [&](auto&& setter) {
    PrimitiveParams p;
    setter(p);
    out.push_back(canonical(kind, p));
  };

  switch (kind) {
    case PrimitiveKind::UpdateColor:
    case PrimitiveKind::AddBorder:
    case PrimitiveKind::FillRectangle:
    case PrimitiveKind::HollowRectangle:
    case PrimitiveKind::Fill:
    case PrimitiveKind::Connect:
      for (Color c : ctx.palette) with([&](PrimitiveParams& p) { p.color = c; });
      break;
    case PrimitiveKind::MoveNode:
    case PrimitiveKind::ExtendNode:
      for (Direction d : kAllDirections) with([&](PrimitiveParams& p) { p.direction = d; });
      break;
    case PrimitiveKind::MoveNodeMax:
    case PrimitiveKind::Magnet:
    case PrimitiveKind::Shift:
    case PrimitiveKind::MirrorNode:
      for (Direction d : kOrthogonal) with([&](PrimitiveParams& p) { p.direction = d; });
      break;
    case PrimitiveKind::MirrorDuplicate:
      for (Direction d : kOrthogonal) {
        const bool horizontal = d == Direction::Left || d == Direction::Right;
        if (fits(horizontal ? max_h : 2 * max_h, horizontal ? 2 * max_w : max_w))
          with([&](PrimitiveParams& p) { p.direction = d; });
      }
      break;
    case PrimitiveKind::Beam:
      for (Direction d : kOrthogonal)
        for (Color c : ctx.palette)
          with([&](PrimitiveParams& p) {
            p.direction = d;
            p.color = c;
          });
      break;
    case PrimitiveKind::RotateNode:
    case PrimitiveKind::RotateGrid:
      for (int a : {90, 180, 270}) with([&](PrimitiveParams& p) { p.angle = a; });
      break;
    case PrimitiveKind::FlipNode:
      for (Axis a : {Axis::Horizontal, Axis::Vertical, Axis::Both})
        with([&](PrimitiveParams& p) { p.axis = a; });
      break;
    case PrimitiveKind::MirrorGrid:
      for (Axis a : {Axis::Horizontal, Axis::Vertical, Axis::Both})
        with([&](PrimitiveParams& p) { p.axis = a; });
      break;
    case PrimitiveKind::InsertNode:
      for (Anchor a : {Anchor::TopLeft, Anchor::TopRight, Anchor::BottomLeft, Anchor::BottomRight})
        with([&](PrimitiveParams& p) { p.anchor = a; });
      break;
    case PrimitiveKind::RemoveNode:
    case PrimitiveKind::Extract:
    case PrimitiveKind::Truncate: with([](PrimitiveParams&) {}); break;
    case PrimitiveKind::UpscaleGrid: {
      for (int k = 2; k <= 6; ++k)
        if (fits(max_h * k, max_w * k)) with([&](PrimitiveParams& p) { p.count = k; });
      if (ctx.height_ratio && ctx.height_ratio == ctx.width_ratio)
        std::stable_partition(out.begin(), out.end(),
                              [&](const PrimitiveParams& p) { return p.count == *ctx.height_ratio; });
      break;
    }
    case PrimitiveKind::Duplicate: {
      for (Axis a : {Axis::Horizontal, Axis::Vertical, Axis::Both})
        for (int k = 2; k <= 6; ++k) {
          const int h = a == Axis::Horizontal ? max_h : max_h * k;
          const int w = a == Axis::Vertical ? max_w : max_w * k;
          if (fits(h, w))
            with([&](PrimitiveParams& p) {
              p.axis = a;
              p.count = k;
            });
        }
      if (ctx.height_ratio && ctx.width_ratio) {
        const int hr = *ctx.height_ratio, wr = *ctx.width_ratio;
        std::stable_partition(out.begin(), out.end(), [&](const PrimitiveParams& p) {
          const int eh = p.axis == Axis::Horizontal ? 1 : p.count;
          const int ew = p.axis == Axis::Vertical ? 1 : p.count;
          return eh == hr && ew == wr;
        });
      }
      break;
    }
    case PrimitiveKind::RotateDuplicate:
      for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
        const bool horizontal = a == Axis::Horizontal;
        if (!fits(horizontal ? max_h : 2 * max_h, horizontal ? 2 * max_w : max_w)) continue;
        for (int angle : {90, 180, 270}) {
          if (angle != 180 && !all_square) continue;
          with([&](PrimitiveParams& p) {
            p.axis = a;
            p.angle = angle;
          });
        }
      }
      if (all_square && fits(2 * max_h, 2 * max_w))
        with([](PrimitiveParams& p) {
          p.axis = Axis::Both;
          p.angle = 90;
        });
      break;
    case PrimitiveKind::Recolor:
      for (int src = 0; src < kNumColors; ++src) {
        if (!present[src]) continue;
        for (Color c : ctx.palette)
          if (c != src)
            with([&](PrimitiveParams& p) {
              p.source_color = static_cast<Color>(src);
              p.color = c;
            });
      }
      break;
  }
  return out;
}

ordered_json call_to_json(const PrimitiveCall& call) {
  const auto& p = call.params;
  const unsigned f = fields_of(call.kind);
  ordered_json params = ordered_json::object();
  if (f & kDirection) params["direction"] = kDirectionNames[static_cast<int>(p.direction)];
  if (f & kAxis) params["axis"] = kAxisNames[static_cast<int>(p.axis)];
  if (f & kAnchor) params["anchor"] = kAnchorNames[static_cast<int>(p.anchor)];
  if (f & kSourceColor) params["source_color"] = p.source_color;
  if (f & kColor) params["color"] = p.color;
  if (f & kAngle) params["angle"] = p.angle;
  if (f & kCount) params[call.kind == PrimitiveKind::UpscaleGrid ? "factor" : "count"] = p.count;
  ordered_json out;
  out["kind"] = to_string(call.kind);
  out["params"] = std::move(params);
  return out;
}

PrimitiveCall call_from_json(const json& value) {
  if (!value.is_object() || !value.contains("kind") || !value.at("kind").is_string())
    throw Error(ErrorCode::MalformedProgram, "primitive without kind");
  const std::string name = value.at("kind").get<std::string>();
  const auto kind = primitive_from_string(name);
  if (!kind) throw Error(ErrorCode::MalformedProgram, "unknown primitive " + name);
  const json params = value.value("params", json::object());
  auto need = [&](const char* key) -> const json& {
    if (!params.contains(key))
      throw Error(ErrorCode::MalformedProgram, name + " missing parameter " + key);
    return params.at(key);
  };
  auto integer = [&](const char* key) {
    const json& v = need(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::MalformedProgram, std::string("bad ") + key);
    return v.get<int>();
  };
  auto color = [&](const char* key) {
    const int v = integer(key);
    if (v < 0 || v >= kNumColors) throw Error(ErrorCode::MalformedProgram, "color out of range");
    return static_cast<Color>(v);
  };
  PrimitiveCall call;
  call.kind = *kind;
  const unsigned f = fields_of(*kind);
  auto& p = call.params;
  if (f & kDirection) p.direction = enum_from<Direction>(kDirectionNames, need("direction"), "direction");
  if (f & kAxis) p.axis = enum_from<Axis>(kAxisNames, need("axis"), "axis");
  if (f & kAnchor) p.anchor = enum_from<Anchor>(kAnchorNames, need("anchor"), "anchor");
  if (f & kSourceColor) p.source_color = color("source_color");
  if (f & kColor) p.color = color("color");
  if (f & kAngle) p.angle = integer("angle");
  if (f & kCount) p.count = integer(*kind == PrimitiveKind::UpscaleGrid ? "factor" : "count");
  try {
    validate(call);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedProgram, e.what());
  }
  return call;
}

}  // namespace nsa
