#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsa/abstraction.hpp"

namespace nsa {

enum class FilterKind : std::uint8_t { ByColor, BySize, ByDegree, ByNeighborColor };

// Parameter values resolved against each graph when the filter is applied.
enum class FilterSpecial : std::uint8_t { None, MostCommon, LeastCommon, Max, Min, Odd };

struct FilterParam {
  int value = 0;
  FilterSpecial special = FilterSpecial::None;

  friend bool operator==(const FilterParam&, const FilterParam&) = default;
};

enum class FilterOp : std::uint8_t { All, Leaf, And, Or, Not };

// Composite depth counts operator levels: a leaf is 0, NOT(leaf) is 1.
inline constexpr int kMaxFilterDepth = 2;

struct FilterExpr {
  FilterOp op = FilterOp::All;
  FilterKind kind = FilterKind::ByColor;  // Leaf only
  FilterParam param;                      // Leaf only
  std::vector<FilterExpr> children;       // And/Or: 2, Not: 1

  static FilterExpr match_all() { return {}; }
  static FilterExpr leaf(FilterKind kind, FilterParam param);
  static FilterExpr conj(FilterExpr a, FilterExpr b);
  static FilterExpr disj(FilterExpr a, FilterExpr b);
  static FilterExpr negate(FilterExpr a);

  int depth() const;
  bool well_formed() const;
  bool is_match_all() const { return op == FilterOp::All; }

  friend bool operator==(const FilterExpr&, const FilterExpr&) = default;
};

// Sorted node ids.
using NodeSet = std::vector<int>;

NodeSet apply_filter(const FilterExpr& expr, const AbstractGraph& graph);

// Leaves with parameters grounded in the colors, sizes and degrees observed
// across `graphs`, plus special values. No deduplication.
std::vector<FilterExpr> ground_leaf_filters(std::span<const AbstractGraph> graphs);

// Match-all first, then grounded leaves, then NOT / AND / OR composites of the
// useful leaves. No two entries select the same node sets on every graph, and
// entries selecting nothing on every graph are dropped.
std::vector<FilterExpr> enumerate_filters(std::span<const AbstractGraph> graphs);

nlohmann::ordered_json filter_to_json(const FilterExpr& expr);
FilterExpr filter_from_json(const nlohmann::json& value);
std::string describe(const FilterExpr& expr);

}  // namespace nsa
