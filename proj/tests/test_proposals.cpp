#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nsa/error.hpp"
#include "nsa/proposals.hpp"
#include "nsa/taskgen.hpp"
#include "support.hpp"

using namespace nsa;

namespace {

using Kind = std::optional<PrimitiveKind>;

std::vector<Kind> vocabulary() {
  std::vector<Kind> v;
  for (auto k : all_primitive_kinds()) v.push_back(k);
  v.push_back(std::nullopt);
  return v;
}

// Scores fall with list order.
std::vector<ProposalEntry> ranked(const std::vector<Kind>& order) {
  std::vector<ProposalEntry> out;
  for (std::size_t i = 0; i < order.size(); ++i) out.push_back({order[i], 1.0 - 0.01 * static_cast<double>(i)});
  return out;
}

// Vocabulary with `front` moved to the head, in the given order.
std::vector<Kind> with_front(std::vector<Kind> front) {
  auto rest = vocabulary();
  for (const auto& k : front) rest.erase(std::find(rest.begin(), rest.end(), k));
  front.insert(front.end(), rest.begin(), rest.end());
  return front;
}

ProposalSet make_set(std::vector<Kind> p1, std::vector<Kind> p2, std::vector<Kind> p3, std::string id = "t") {
  return {std::move(id), {ranked(with_front(std::move(p1))), ranked(with_front(std::move(p2))),
                          ranked(with_front(std::move(p3)))}};
}

constexpr auto U = PrimitiveKind::UpdateColor;
constexpr auto M = PrimitiveKind::MoveNode;
constexpr auto F = PrimitiveKind::Fill;
constexpr auto R = PrimitiveKind::RotateGrid;
constexpr auto X = PrimitiveKind::Extract;
constexpr auto D = PrimitiveKind::Duplicate;
const Kind N = std::nullopt;

}  // namespace

TEST_CASE("no_trans first at position 2 means length 1 with top-5") {
  const auto r = expand_topk(make_set({U, N, M, F, R, X, D}, {N}, {N}));
  CHECK(r.effective_length == 1);
  REQUIRE(r.allowed.size() == 1);
  CHECK(r.allowed[0] == std::vector<PrimitiveKind>{U, M, F, R, X});
}

TEST_CASE("no_trans first at position 3 means length 2 with top-4") {
  const auto r = expand_topk(make_set({U, M, F, R, X}, {N, D, X, R, F}, {N}));
  // Position 2 argmax is no_trans here, so the length-1 rule wins.
  CHECK(r.effective_length == 1);

  const auto two = expand_topk(make_set({U, M, F, R, X}, {D, N, X, R, F}, {N, U}));
  CHECK(two.effective_length == 2);
  REQUIRE(two.allowed.size() == 2);
  CHECK(two.allowed[0] == std::vector<PrimitiveKind>{U, M, F, R});
  CHECK(two.allowed[1] == std::vector<PrimitiveKind>{D, X, R, F});
}

TEST_CASE("otherwise length 3 with top-3 everywhere") {
  const auto r = expand_topk(make_set({U, M, N, F}, {D, X, R}, {R, N, F, U}));
  CHECK(r.effective_length == 3);
  REQUIRE(r.allowed.size() == 3);
  CHECK(r.allowed[0] == std::vector<PrimitiveKind>{U, M, F});
  CHECK(r.allowed[1] == std::vector<PrimitiveKind>{D, X, R});
  CHECK(r.allowed[2] == std::vector<PrimitiveKind>{R, F, U});
  const auto cfg = restrict_config(SearchConfig{}, r);
  CHECK(cfg.max_depth == 3);
  REQUIRE(cfg.allowed_primitives);
  CHECK(*cfg.allowed_primitives == r.allowed);
}

TEST_CASE("validation rejects anything but a sorted permutation") {
  auto good = make_set({U}, {N}, {N});
  CHECK_NOTHROW(validate(good));
  auto missing = good;
  missing.positions[1].pop_back();
  CHECK_THROWS_AS(validate(missing), Error);
  auto twice = good;
  twice.positions[0][1].kind = twice.positions[0][0].kind;
  CHECK_THROWS_AS(validate(twice), Error);
  auto unsorted = good;
  std::swap(unsorted.positions[2][0].score, unsorted.positions[2][5].score);
  CHECK_THROWS_AS(validate(unsorted), Error);
  auto nan = good;
  nan.positions[0][3].score = std::nan("");
  CHECK_THROWS_AS(validate(nan), Error);
}

TEST_CASE("oracle proposals are always included at rank 1") {
  GenConfig c;
  c.seed = 8;
  c.count = 60;
  const auto data = generate_dataset(c, load_task_dir(testing::data_dir() + "/arc/training"));
  std::vector<ProposalSet> sets;
  std::vector<std::pair<std::string, Label>> truths;
  for (const auto& r : data.records) {
    sets.push_back(oracle_proposals(r.program, r.task.id));
    truths.emplace_back(r.task.id, r.label);
    const auto s = score_predictions(sets.back(), r.label);
    CHECK(s.inclusion);
    CHECK(s.ranks == std::array<int, 3>{1, 1, 1});
    const auto restriction = expand_topk(sets.back());
    CHECK(restriction.effective_length == label_length(r.label));
    for (int i = 0; i < restriction.effective_length; ++i) CHECK(restriction.allowed[i].front() == *r.label[i]);
  }
  std::reverse(sets.begin(), sets.end());
  const auto m = score_dataset(sets, truths);
  CHECK(m.n == 60);
  CHECK(m.inclusion_rate == 1.0);
  CHECK(m.mean_rank == std::array<double, 3>{1.0, 1.0, 1.0});
}

TEST_CASE("uniform random proposals match the combinatorial inclusion rate") {
  // Inclusion needs the right effective length and each true kind among the
  // top-k of 26 executable kinds:
  //   L=1: (1/27)(5/26)   L=2: (26/27)(1/27)(4/26)^2   L=3: (26/27)^2 (3/26)^3
  const std::array<double, 3> exact{(1.0 / 27) * (5.0 / 26),
                                    (26.0 / 27) * (1.0 / 27) * std::pow(4.0 / 26, 2),
                                    std::pow(26.0 / 27, 2) * std::pow(3.0 / 26, 3)};
  const std::array<Label, 3> labels{Label{U, N, N}, Label{U, M, N}, Label{U, M, F}};
  std::mt19937_64 rng(99);
  const int trials = 400000;
  for (int len = 0; len < 3; ++len) {
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
      ProposalSet p;
      for (auto& pos : p.positions) {
        auto order = vocabulary();
        std::shuffle(order.begin(), order.end(), rng);
        pos = ranked(order);
      }
      hits += score_predictions(p, labels[len]).inclusion;
    }
    const double rate = static_cast<double>(hits) / trials;
    const double sigma = std::sqrt(exact[len] * (1 - exact[len]) / trials);
    CAPTURE(len);
    CHECK(std::abs(rate - exact[len]) < 4 * sigma + 1e-9);
  }
}

TEST_CASE("ranks are positions in the full list") {
  const auto p = make_set({M, F, U}, {N}, {R, N});
  const auto s = score_predictions(p, Label{U, N, N});
  CHECK(s.ranks == std::array<int, 3>{3, 1, 2});
  CHECK(s.inclusion);
  CHECK_FALSE(score_predictions(p, Label{U, M, N}).inclusion);
}

TEST_CASE("mismatched ids are an error") {
  const std::vector<ProposalSet> sets{oracle_proposals(Label{U, N, N}, "a"), oracle_proposals(Label{U, N, N}, "b")};
  const std::vector<std::pair<std::string, Label>> ab{{"a", Label{U, N, N}}, {"b", Label{U, N, N}}};
  const std::vector<std::pair<std::string, Label>> ac{{"a", Label{U, N, N}}, {"c", Label{U, N, N}}};
  const std::vector<std::pair<std::string, Label>> a{{"a", Label{U, N, N}}};
  CHECK_NOTHROW(score_dataset(sets, ab));
  CHECK_THROWS_AS(score_dataset(sets, ac), Error);
  CHECK_THROWS_AS(score_dataset(sets, a), Error);
  const std::vector<ProposalSet> dup{sets[0], sets[0]};
  CHECK_THROWS_AS(score_dataset(dup, ab), Error);
}

TEST_CASE("proposal JSON round-trips and is re-sorted on read") {
  const auto p = make_set({D, N}, {N}, {N}, "syn-000001");
  const auto j = proposals_to_json(p);
  CHECK(j["task_id"] == "syn-000001");
  CHECK(j["positions"][0][0]["kind"] == "duplicate");
  CHECK(j["positions"][0][1]["kind"] == "no_trans");
  CHECK(proposals_from_json(nlohmann::json::parse(j.dump())) == p);

  auto shuffled = nlohmann::json::parse(j.dump());
  std::reverse(shuffled["positions"][1].begin(), shuffled["positions"][1].end());
  CHECK(proposals_from_json(shuffled) == p);

  auto bad = nlohmann::json::parse(j.dump());
  bad["positions"][2][4]["kind"] = "teleport";
  CHECK_THROWS_AS(proposals_from_json(bad), Error);
  bad = nlohmann::json::parse(j.dump());
  bad["positions"].erase(2);
  CHECK_THROWS_AS(proposals_from_json(bad), Error);
  bad = nlohmann::json::parse(j.dump());
  bad["positions"][0][0]["score"] = "high";
  CHECK_THROWS_AS(proposals_from_json(bad), Error);

  const std::string path = "proposals_lines.jsonl";
  write_file(path, proposals_to_json(p).dump() + "\n\n" + proposals_to_json(p).dump() + "\n");
  CHECK(read_proposals(path).size() == 2);
  write_file(path, "[" + proposals_to_json(p).dump() + "]");
  CHECK(read_proposals(path).size() == 1);
  std::filesystem::remove(path);

  const auto mj = metrics_to_json(PredictionMetrics{0.5, {1.0, 2.0, 3.0}, 4});
  CHECK(mj.dump() == R"({"inclusion_rate":0.5,"mean_rank":[1.0,2.0,3.0],"n":4})");
}
