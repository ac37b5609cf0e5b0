#include "nsa/filters.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Pairwise composites are formed over at most this many useful leaves.
constexpr std::size_t kMaxCompositeLeaves = 12;

std::string_view kind_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::ByColor: return "by_color";
    case FilterKind::BySize: return "by_size";
    case FilterKind::ByDegree: return "by_degree";
    case FilterKind::ByNeighborColor: return "by_neighbor_color";
  }
  return "?";
}

std::string_view param_key(FilterKind kind) {
  switch (kind) {
    case FilterKind::ByColor:
    case FilterKind::ByNeighborColor: return "color";
    case FilterKind::BySize: return "size";
    case FilterKind::ByDegree: return "degree";
  }
  return "?";
}

std::string_view special_name(FilterSpecial s) {
  switch (s) {
    case FilterSpecial::MostCommon: return "MOST_COMMON";
    case FilterSpecial::LeastCommon: return "LEAST_COMMON";
    case FilterSpecial::Max: return "MAX";
    case FilterSpecial::Min: return "MIN";
    case FilterSpecial::Odd: return "ODD";
    case FilterSpecial::None: break;
  }
  return "";
}

std::string_view op_name(FilterOp op) {
  switch (op) {
    case FilterOp::And: return "AND";
    case FilterOp::Or: return "OR";
    case FilterOp::Not: return "NOT";
    default: return "";
  }
}

NodeSet apply_leaf(FilterKind kind, FilterParam param, const AbstractGraph& g) {
  NodeSet out;
  switch (kind) {
    case FilterKind::ByColor: {
      if (param.special == FilterSpecial::None) {
        for (const auto& n : g.nodes)
          if (n.color == param.value) out.push_back(n.id);
        break;
      }
      std::array<int, kNumColors> counts{};
      for (const auto& n : g.nodes) ++counts[n.color];
      int target = param.special == FilterSpecial::MostCommon ? 0 : INT32_MAX;
      for (int c : counts) {
        if (c == 0) continue;
        target = param.special == FilterSpecial::MostCommon ? std::max(target, c)
                                                            : std::min(target, c);
      }
      for (const auto& n : g.nodes)
        if (counts[n.color] == target) out.push_back(n.id);
      break;
    }
    case FilterKind::BySize: {
      if (g.nodes.empty()) break;
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& n : g.nodes) {
        lo = std::min(lo, n.size());
        hi = std::max(hi, n.size());
      }
      for (const auto& n : g.nodes) {
        bool keep = false;
        switch (param.special) {
          case FilterSpecial::Max: keep = n.size() == hi; break;
          case FilterSpecial::Min: keep = n.size() == lo; break;
          case FilterSpecial::Odd: keep = n.size() % 2 == 1; break;
          default: keep = n.size() == static_cast<std::size_t>(param.value);
        }
        if (keep) out.push_back(n.id);
      }
      break;
    }
    case FilterKind::ByDegree: {
      const auto deg = g.degrees();
      for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (deg[i] == param.value) out.push_back(g.nodes[i].id);
      break;
    }
    case FilterKind::ByNeighborColor: {
      std::set<int> hit;
      for (const auto& e : g.edges) {
        const ObjectNode* a = g.find(e.a);
        const ObjectNode* b = g.find(e.b);
        if (!a || !b) continue;
        if (b->color == param.value) hit.insert(a->id);
        if (a->color == param.value) hit.insert(b->id);
      }
      out.assign(hit.begin(), hit.end());
      break;
    }
  }
  return out;
}

// Concatenated per-graph selections, -1 separated.
std::vector<int> signature(const FilterExpr& f, std::span<const AbstractGraph> graphs,
                           bool& any_selected) {
  std::vector<int> sig;
  any_selected = false;
  for (const auto& g : graphs) {
    NodeSet s = apply_filter(f, g);
    any_selected = any_selected || !s.empty();
    sig.insert(sig.end(), s.begin(), s.end());
    sig.push_back(-1);
  }
  return sig;
}

}  // namespace

FilterExpr FilterExpr::leaf(FilterKind kind, FilterParam param) {
  FilterExpr e;
  e.op = FilterOp::Leaf;
  e.kind = kind;
  e.param = param;
  return e;
}

FilterExpr FilterExpr::conj(FilterExpr a, FilterExpr b) {
  FilterExpr e;
  e.op = FilterOp::And;
  e.children = {std::move(a), std::move(b)};
  return e;
}

FilterExpr FilterExpr::disj(FilterExpr a, FilterExpr b) {
  FilterExpr e;
  e.op = FilterOp::Or;
  e.children = {std::move(a), std::move(b)};
  return e;
}

FilterExpr FilterExpr::negate(FilterExpr a) {
  FilterExpr e;
  e.op = FilterOp::Not;
  e.children = {std::move(a)};
  return e;
}

int FilterExpr::depth() const {
  if (op == FilterOp::All || op == FilterOp::Leaf) return 0;
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

bool FilterExpr::well_formed() const {
  switch (op) {
    case FilterOp::All:
    case FilterOp::Leaf: return children.empty();
    case FilterOp::Not:
      if (children.size() != 1) return false;
      break;
    case FilterOp::And:
    case FilterOp::Or:
      if (children.size() != 2) return false;
      break;
  }
  if (depth() > kMaxFilterDepth) return false;
  return std::all_of(children.begin(), children.end(),
                     [](const FilterExpr& c) { return c.well_formed(); });
}

NodeSet apply_filter(const FilterExpr& expr, const AbstractGraph& graph) {
  switch (expr.op) {
    case FilterOp::All: return graph.node_ids();
    case FilterOp::Leaf: return apply_leaf(expr.kind, expr.param, graph);
    case FilterOp::Not: {
      const NodeSet inner = apply_filter(expr.children.at(0), graph);
      const NodeSet all = graph.node_ids();
      NodeSet out;
      std::set_difference(all.begin(), all.end(), inner.begin(), inner.end(),
                          std::back_inserter(out));
      return out;
    }
    case FilterOp::And:
    case FilterOp::Or: {
      const NodeSet a = apply_filter(expr.children.at(0), graph);
      const NodeSet b = apply_filter(expr.children.at(1), graph);
      NodeSet out;
      if (expr.op == FilterOp::And)
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
      else
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
      return out;
    }
  }
  return {};
}

std::vector<FilterExpr> ground_leaf_filters(std::span<const AbstractGraph> graphs) {
  std::set<int> colors, sizes, degrees;
  for (const auto& g : graphs) {
    const auto deg = g.degrees();
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      colors.insert(g.nodes[i].color);
      sizes.insert(static_cast<int>(g.nodes[i].size()));
      degrees.insert(deg[i]);
    }
  }
  std::vector<FilterExpr> out;
  for (int c : colors) out.push_back(FilterExpr::leaf(FilterKind::ByColor, {c}));
  out.push_back(FilterExpr::leaf(FilterKind::ByColor, {0, FilterSpecial::MostCommon}));
  out.push_back(FilterExpr::leaf(FilterKind::ByColor, {0, FilterSpecial::LeastCommon}));
  for (int s : sizes) out.push_back(FilterExpr::leaf(FilterKind::BySize, {s}));
  out.push_back(FilterExpr::leaf(FilterKind::BySize, {0, FilterSpecial::Max}));
  out.push_back(FilterExpr::leaf(FilterKind::BySize, {0, FilterSpecial::Min}));
  out.push_back(FilterExpr::leaf(FilterKind::BySize, {0, FilterSpecial::Odd}));
  for (int d : degrees) out.push_back(FilterExpr::leaf(FilterKind::ByDegree, {d}));
  for (int c : colors) out.push_back(FilterExpr::leaf(FilterKind::ByNeighborColor, {c}));
  return out;
}

std::vector<FilterExpr> enumerate_filters(std::span<const AbstractGraph> graphs) {
  std::vector<FilterExpr> out;
  std::set<std::vector<int>> seen;
  bool any = false;
  out.push_back(FilterExpr::match_all());
  seen.insert(signature(out.back(), graphs, any));

  auto admit = [&](FilterExpr f) {
    bool selected = false;
    auto sig = signature(f, graphs, selected);
    if (!selected || !seen.insert(std::move(sig)).second) return false;
    out.push_back(std::move(f));
    return true;
  };

  std::vector<FilterExpr> useful;
  for (auto& leaf : ground_leaf_filters(graphs))
    if (admit(leaf)) useful.push_back(std::move(leaf));

  for (const auto& leaf : useful) admit(FilterExpr::negate(leaf));
  const std::size_t n = std::min(useful.size(), kMaxCompositeLeaves);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      admit(FilterExpr::conj(useful[i], useful[j]));
      admit(FilterExpr::disj(useful[i], useful[j]));
    }
  return out;
}

ordered_json filter_to_json(const FilterExpr& expr) {
  ordered_json out;
  switch (expr.op) {
    case FilterOp::All:
      out["kind"] = "all";
      out["params"] = ordered_json::object();
      break;
    case FilterOp::Leaf: {
      out["kind"] = kind_name(expr.kind);
      ordered_json params;
      if (expr.param.special != FilterSpecial::None)
        params[std::string(param_key(expr.kind))] = special_name(expr.param.special);
      else
        params[std::string(param_key(expr.kind))] = expr.param.value;
      out["params"] = std::move(params);
      break;
    }
    default: {
      out["op"] = op_name(expr.op);
      ordered_json children = ordered_json::array();
      for (const auto& c : expr.children) children.push_back(filter_to_json(c));
      out["children"] = std::move(children);
    }
  }
  return out;
}

FilterExpr filter_from_json(const json& value) {
  auto fail = [](const std::string& what) -> FilterExpr {
    throw Error(ErrorCode::MalformedProgram, "filter: " + what);
  };
  if (!value.is_object()) return fail("not an object");
  if (value.contains("op")) {
    if (!value.at("op").is_string()) return fail("op must be a string");
    const std::string op = value.at("op").get<std::string>();
    if (!value.contains("children") || !value.at("children").is_array())
      return fail("composite without children");
    std::vector<FilterExpr> children;
    for (const auto& c : value.at("children")) children.push_back(filter_from_json(c));
    FilterExpr e;
    if (op == "AND") e.op = FilterOp::And;
    else if (op == "OR") e.op = FilterOp::Or;
    else if (op == "NOT") e.op = FilterOp::Not;
    else return fail("unknown op " + op);
    e.children = std::move(children);
    if (!e.well_formed()) return fail("ill-formed composite");
    return e;
  }
  if (!value.contains("kind") || !value.at("kind").is_string()) return fail("missing kind");
  const std::string kind = value.at("kind").get<std::string>();
  if (kind == "all") return FilterExpr::match_all();
  for (FilterKind k : {FilterKind::ByColor, FilterKind::BySize, FilterKind::ByDegree,
                       FilterKind::ByNeighborColor}) {
    if (kind_name(k) != kind) continue;
    const std::string key(param_key(k));
    if (!value.contains("params") || !value.at("params").contains(key))
      return fail("missing parameter " + key);
    const json& p = value.at("params").at(key);
    if (p.is_number_integer()) return FilterExpr::leaf(k, {p.get<int>()});
    if (p.is_string()) {
      const std::string s = p.get<std::string>();
      for (FilterSpecial sp : {FilterSpecial::MostCommon, FilterSpecial::LeastCommon,
                               FilterSpecial::Max, FilterSpecial::Min, FilterSpecial::Odd})
        if (special_name(sp) == s) return FilterExpr::leaf(k, {0, sp});
    }
    return fail("bad parameter for " + kind);
  }
  return fail("unknown kind " + kind);
}

std::string describe(const FilterExpr& expr) { return filter_to_json(expr).dump(); }

}  // namespace nsa
