#include "nsa/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedProposal, what);
}

int vocab_index(const std::optional<PrimitiveKind>& kind) {
  return kind ? static_cast<int>(*kind) : kNumPrimitiveKinds;
}

std::optional<PrimitiveKind> argmax(const std::vector<ProposalEntry>& position) {
  return position.front().kind;
}

std::vector<PrimitiveKind> top_executable(const std::vector<ProposalEntry>& position,
                                          std::size_t k) {
  std::vector<PrimitiveKind> out;
  for (const auto& e : position) {
    if (out.size() == k) break;
    if (e.kind) out.push_back(*e.kind);
  }
  return out;
}

}  // namespace

void validate(const ProposalSet& proposals) {
  for (const auto& position : proposals.positions) {
    if (position.size() != kLabelVocabulary)
      malformed("position lists " + std::to_string(position.size()) + " kinds, expected " +
                std::to_string(kLabelVocabulary));
    std::array<bool, kLabelVocabulary> seen{};
    for (std::size_t i = 0; i < position.size(); ++i) {
      const int idx = vocab_index(position[i].kind);
      if (seen[idx]) malformed("kind listed twice");
      seen[idx] = true;
      if (!std::isfinite(position[i].score)) malformed("non-finite score");
      if (i > 0 && position[i].score > position[i - 1].score) malformed("scores not sorted");
    }
  }
}

Restriction expand_topk(const ProposalSet& proposals) {
  validate(proposals);
  const auto& pos = proposals.positions;
  Restriction r;
  if (!argmax(pos[1])) {
    r.effective_length = 1;
    r.allowed = {top_executable(pos[0], 5)};
  } else if (!argmax(pos[2])) {
    r.effective_length = 2;
    r.allowed = {top_executable(pos[0], 4), top_executable(pos[1], 4)};
  } else {
    r.effective_length = 3;
    r.allowed = {top_executable(pos[0], 3), top_executable(pos[1], 3), top_executable(pos[2], 3)};
  }
  return r;
}

ProposalSet oracle_proposals(const Label& truth, std::string task_id) {
  ProposalSet p;
  p.task_id = std::move(task_id);
  for (int i = 0; i < kMaxProgramSteps; ++i) {
    auto& position = p.positions[i];
    position.push_back({truth[i], 1.0});
    double score = 0.5;
    for (int v = 0; v < kLabelVocabulary; ++v) {
      std::optional<PrimitiveKind> kind;
      if (v < kNumPrimitiveKinds) kind = static_cast<PrimitiveKind>(v);
      if (kind == truth[i]) continue;
      position.push_back({kind, score});
      score -= 0.01;
    }
  }
  return p;
}

ProposalSet oracle_proposals(const Program& program, std::string task_id) {
  return oracle_proposals(label_of(program), std::move(task_id));
}

PredictionScore score_predictions(const ProposalSet& proposals, const Label& truth) {
  PredictionScore s;
  for (int i = 0; i < kMaxProgramSteps; ++i) {
    const auto& position = proposals.positions[i];
    const auto it = std::find_if(position.begin(), position.end(),
                                 [&](const ProposalEntry& e) { return e.kind == truth[i]; });
    s.ranks[i] = static_cast<int>(it - position.begin()) + 1;
  }
  const Restriction r = expand_topk(proposals);
  s.inclusion = r.effective_length == label_length(truth);
  for (int i = 0; i < r.effective_length && s.inclusion; ++i) {
    const auto& allowed = r.allowed[i];
    s.inclusion = truth[i] && std::find(allowed.begin(), allowed.end(), *truth[i]) != allowed.end();
  }
  return s;
}

PredictionMetrics score_dataset(std::span<const ProposalSet> proposals,
                                std::span<const std::pair<std::string, Label>> truths) {
  std::map<std::string, const ProposalSet*> by_id;
  for (const auto& p : proposals)
    if (!by_id.emplace(p.task_id, &p).second) malformed("duplicate proposal id " + p.task_id);
  if (by_id.size() != truths.size()) malformed("proposal and dataset task counts differ");
  PredictionMetrics m;
  std::size_t included = 0;
  for (const auto& [id, label] : truths) {
    auto it = by_id.find(id);
    if (it == by_id.end()) malformed("no proposal for task " + id);
    const auto s = score_predictions(*it->second, label);
    included += s.inclusion;
    for (int i = 0; i < kMaxProgramSteps; ++i) m.mean_rank[i] += s.ranks[i];
  }
  m.n = truths.size();
  if (m.n > 0) {
    m.inclusion_rate = static_cast<double>(included) / static_cast<double>(m.n);
    for (auto& r : m.mean_rank) r /= static_cast<double>(m.n);
  }
  return m;
}

SearchConfig restrict_config(SearchConfig base, const Restriction& restriction) {
  base.max_depth = restriction.effective_length;
  base.allowed_primitives = restriction.allowed;
  return base;
}

ordered_json proposals_to_json(const ProposalSet& proposals) {
  ordered_json out;
  out["task_id"] = proposals.task_id;
  ordered_json positions = ordered_json::array();
  for (const auto& position : proposals.positions) {
    ordered_json list = ordered_json::array();
    for (const auto& e : position) {
      ordered_json entry;
      entry["kind"] = label_name(e.kind);
      entry["score"] = e.score;
      list.push_back(std::move(entry));
    }
    positions.push_back(std::move(list));
  }
  out["positions"] = std::move(positions);
  return out;
}

ProposalSet proposals_from_json(const json& value) {
  if (!value.is_object() || !value.contains("positions"))
    malformed("proposal object needs \"positions\"");
  const json& positions = value.at("positions");
  if (!positions.is_array() || positions.size() != kMaxProgramSteps)
    malformed("proposal needs exactly 3 positions");
  ProposalSet p;
  if (value.contains("task_id")) {
    if (!value.at("task_id").is_string()) malformed("task_id must be a string");
    p.task_id = value.at("task_id").get<std::string>();
  }
  for (int i = 0; i < kMaxProgramSteps; ++i) {
    if (!positions[i].is_array()) malformed("position is not an array");
    for (const auto& e : positions[i]) {
      if (!e.is_object() || !e.contains("kind") || !e.at("kind").is_string() ||
          !e.contains("score") || !e.at("score").is_number())
        malformed("entry needs string kind and numeric score");
      bool ok = false;
      auto kind = label_kind_from_string(e.at("kind").get<std::string>(), ok);
      if (!ok) malformed("unknown kind " + e.at("kind").get<std::string>());
      p.positions[i].push_back({kind, e.at("score").get<double>()});
    }
    std::stable_sort(p.positions[i].begin(), p.positions[i].end(),
                     [](const ProposalEntry& a, const ProposalEntry& b) { return a.score > b.score; });
  }
  validate(p);
  return p;
}

std::vector<ProposalSet> read_proposals(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<ProposalSet> out;
  json whole = json::parse(text, nullptr, false);
  if (!whole.is_discarded()) {
    if (whole.is_array())
      for (const auto& v : whole) out.push_back(proposals_from_json(v));
    else
      out.push_back(proposals_from_json(whole));
    return out;
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json v = json::parse(line, nullptr, false);
    if (v.is_discarded()) malformed("bad JSON line in " + path.string());
    out.push_back(proposals_from_json(v));
  }
  return out;
}

ordered_json metrics_to_json(const PredictionMetrics& m) {
  ordered_json out;
  out["inclusion_rate"] = m.inclusion_rate;
  out["mean_rank"] = m.mean_rank;
  out["n"] = m.n;
  return out;
}

}  // namespace nsa
