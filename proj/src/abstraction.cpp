#include "nsa/abstraction.hpp"

#include <algorithm>
#include <map>

namespace nsa {

namespace {

constexpr std::array<AbstractionKind, kNumAbstractionKinds> kCatalog = {
    AbstractionKind::SameColor4,     AbstractionKind::SameColor8,   AbstractionKind::MultiColor4,
    AbstractionKind::VerticalRuns,   AbstractionKind::HorizontalRuns,
    AbstractionKind::SinglePixel,    AbstractionKind::WholeImage,
};

constexpr std::array<std::string_view, kNumAbstractionKinds> kNames = {
    "same_color_4", "same_color_8", "multi_color_4", "vertical_runs",
    "horizontal_runs", "single_pixel", "whole_image",
};

Color dominant_color(const PixelList& pixels) {
  std::array<int, kNumColors> counts{};
  for (const auto& p : pixels) ++counts[p.color];
  return static_cast<Color>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Cell -> component index, -1 for background.
using Labels = std::vector<int>;

std::vector<PixelList> components(const Grid& grid, AbstractionKind kind, Color bg,
                                           Labels& labels) {
  const int h = grid.height();
  const int w = grid.width();
  labels.assign(static_cast<std::size_t>(h) * w, -1);
  std::vector<PixelList> comps;
  auto label_at = [&](int r, int c) -> int& { return labels[static_cast<std::size_t>(r) * w + c]; };

  if (kind == AbstractionKind::WholeImage) {
    auto& all = comps.emplace_back();
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        all.push_back({r, c, grid.at(r, c)});
        label_at(r, c) = 0;
      }
    return comps;
  }

  static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
  const int neighbours = kind == AbstractionKind::SameColor8 ? 8 : 4;
  std::vector<std::pair<int, int>> stack;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Color color = grid.at(r, c);
      if (color == bg || label_at(r, c) >= 0) continue;
      const int id = static_cast<int>(comps.size());
      auto& pixels = comps.emplace_back();
      switch (kind) {
        case AbstractionKind::VerticalRuns:
          for (int rr = r; rr < h && grid.at(rr, c) == color; ++rr) {
            label_at(rr, c) = id;
            pixels.push_back({rr, c, color});
          }
          break;
        case AbstractionKind::HorizontalRuns:
          for (int cc = c; cc < w && grid.at(r, cc) == color; ++cc) {
            label_at(r, cc) = id;
            pixels.push_back({r, cc, color});
          }
          break;
        case AbstractionKind::SinglePixel:
          label_at(r, c) = id;
          pixels.push_back({r, c, color});
          break;
        default: {
          const bool multi = kind == AbstractionKind::MultiColor4;
          stack.assign(1, {r, c});
          label_at(r, c) = id;
          while (!stack.empty()) {
            auto [cr, cc] = stack.back();
            stack.pop_back();
            pixels.push_back({cr, cc, grid.at(cr, cc)});
            for (int k = 0; k < neighbours; ++k) {
              const int nr = cr + kDr[k];
              const int nc = cc + kDc[k];
              if (!grid.contains(nr, nc) || label_at(nr, nc) >= 0) continue;
              const Color nc_color = grid.at(nr, nc);
              if (nc_color == bg || (!multi && nc_color != color)) continue;
              label_at(nr, nc) = id;
              stack.emplace_back(nr, nc);
            }
          }
          std::sort(pixels.begin(), pixels.end(), [](const Pixel& a, const Pixel& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
          });
        }
      }
    }
  }
  return comps;
}

// Row and column sweeps: consecutive labelled cells of different nodes are
// adjacent (no gap) or aligned (only background between them).
std::vector<Edge> proximity_edges(const Labels& labels, int h, int w, bool adjacency_only) {
  std::map<std::pair<int, int>, EdgeTag> found;
  auto link = [&](int a, int b, bool adjacent) {
    if (a == b) return;
    if (!adjacent && adjacency_only) return;
    auto key = std::minmax(a, b);
    auto [it, inserted] = found.emplace(key, adjacent ? EdgeTag::Adjacent : EdgeTag::Aligned);
    if (!inserted && adjacent) it->second = EdgeTag::Adjacent;
  };
  auto at = [&](int r, int c) { return labels[static_cast<std::size_t>(r) * w + c]; };
  for (int r = 0; r < h; ++r) {
    int prev = -1;
    int prev_col = -1;
    for (int c = 0; c < w; ++c) {
      const int l = at(r, c);
      if (l < 0) continue;
      if (prev >= 0) link(prev, l, c - prev_col == 1);
      prev = l;
      prev_col = c;
    }
  }
  for (int c = 0; c < w; ++c) {
    int prev = -1;
    int prev_row = -1;
    for (int r = 0; r < h; ++r) {
      const int l = at(r, c);
      if (l < 0) continue;
      if (prev >= 0) link(prev, l, r - prev_row == 1);
      prev = l;
      prev_row = r;
    }
  }
  std::vector<Edge> edges;
  edges.reserve(found.size());
  for (const auto& [key, tag] : found) edges.push_back({key.first, key.second, tag});
  return edges;
}

}  // namespace

std::span<const AbstractionKind> list_abstractions() { return kCatalog; }

std::string_view to_string(AbstractionKind kind) { return kNames[static_cast<int>(kind)]; }

std::optional<AbstractionKind> abstraction_from_string(std::string_view name) {
  for (int i = 0; i < kNumAbstractionKinds; ++i)
    if (kNames[i] == name) return kCatalog[i];
  return std::nullopt;
}

bool is_lossless(AbstractionKind) { return true; }

BoundingBox ObjectNode::bounds() const {
  BoundingBox box{0, 0, -1, -1};
  if (pixels.empty()) return box;
  box = {pixels.front().row, pixels.front().col, pixels.front().row, pixels.front().col};
  for (const auto& p : pixels) {
    box.top = std::min(box.top, p.row);
    box.bottom = std::max(box.bottom, p.row);
    box.left = std::min(box.left, p.col);
    box.right = std::max(box.right, p.col);
  }
  return box;
}

const ObjectNode* AbstractGraph::find(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const ObjectNode& n, int v) { return n.id < v; });
  return it != nodes.end() && it->id == id ? &*it : nullptr;
}

std::vector<int> AbstractGraph::node_ids() const {
  std::vector<int> ids;
  ids.reserve(nodes.size());
  for (const auto& n : nodes) ids.push_back(n.id);
  return ids;
}

std::vector<int> AbstractGraph::degrees() const {
  std::vector<int> deg(nodes.size(), 0);
  auto index_of = [&](int id) {
    return std::lower_bound(nodes.begin(), nodes.end(), id,
                            [](const ObjectNode& n, int v) { return n.id < v; }) -
           nodes.begin();
  };
  for (const auto& e : edges) {
    ++deg[index_of(e.a)];
    ++deg[index_of(e.b)];
  }
  return deg;
}

Color detect_background(const Grid& grid) {
  const auto counts = grid.histogram();
  if (counts[0] > 0) return 0;
  return static_cast<Color>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

AbstractGraph build_abstraction(const Grid& grid, AbstractionKind kind) {
  AbstractGraph graph;
  graph.kind = kind;
  graph.height = grid.height();
  graph.width = grid.width();
  graph.background = detect_background(grid);

  Labels labels;
  auto comps = components(grid, kind, graph.background, labels);
  graph.nodes.reserve(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    ObjectNode node;
    node.id = static_cast<int>(i);
    node.color = dominant_color(comps[i]);
    node.pixels = std::move(comps[i]);
    graph.nodes.push_back(std::move(node));
  }
  if (kind != AbstractionKind::WholeImage)
    graph.edges = proximity_edges(labels, grid.height(), grid.width(),
                                  kind == AbstractionKind::SinglePixel);
  return graph;
}

Grid reconstruct_grid(const AbstractGraph& graph, int target_height, int target_width) {
  Grid out(target_height, target_width, graph.background);
  for (const auto& node : graph.nodes)
    for (const auto& p : node.pixels)
      if (out.contains(p.row, p.col)) out.set(p.row, p.col, p.color);
  return out;
}

Grid reconstruct_grid(const AbstractGraph& graph) {
  return reconstruct_grid(graph, graph.height, graph.width);
}

}  // namespace nsa
