#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsa/program.hpp"
#include "nsa/search.hpp"

namespace nsa {

// 26 executable kinds plus no_trans.
inline constexpr int kLabelVocabulary = kNumPrimitiveKinds + 1;

struct ProposalEntry {
  std::optional<PrimitiveKind> kind;  // nullopt is no_trans
  double score = 0.0;

  friend bool operator==(const ProposalEntry&, const ProposalEntry&) = default;
};

// Per classification position, the whole vocabulary sorted by descending score.
struct ProposalSet {
  std::string task_id;
  std::array<std::vector<ProposalEntry>, kMaxProgramSteps> positions;

  friend bool operator==(const ProposalSet&, const ProposalSet&) = default;
};

struct Restriction {
  int effective_length = 1;
  std::vector<std::vector<PrimitiveKind>> allowed;  // one set per depth
};

// Throws Error(MalformedProposal) unless every position is a permutation of the
// vocabulary sorted by non-increasing score.
void validate(const ProposalSet& proposals);

// Position 2 argmax no_trans: top-5 of position 1. Else position 3 argmax
// no_trans: top-4 of positions 1 and 2. Else top-3 of every position.
// no_trans entries are skipped while collecting.
Restriction expand_topk(const ProposalSet& proposals);

// Perfect predictor: the true kind (or no_trans) first at each position, the
// rest of the vocabulary after it in fixed order.
ProposalSet oracle_proposals(const Label& truth, std::string task_id = {});
ProposalSet oracle_proposals(const Program& program, std::string task_id = {});

struct PredictionScore {
  bool inclusion = false;
  std::array<int, kMaxProgramSteps> ranks{};  // 1-based, in the full lists
};

PredictionScore score_predictions(const ProposalSet& proposals, const Label& truth);

struct PredictionMetrics {
  double inclusion_rate = 0.0;
  std::array<double, kMaxProgramSteps> mean_rank{};
  std::size_t n = 0;
};

// Pairs proposals with dataset records by task id; throws Error(MalformedProposal)
// on ids present on one side only.
PredictionMetrics score_dataset(std::span<const ProposalSet> proposals,
                                std::span<const std::pair<std::string, Label>> truths);

// Restricts the search to the expanded proposal: max depth = effective length.
SearchConfig restrict_config(SearchConfig base, const Restriction& restriction);

nlohmann::ordered_json proposals_to_json(const ProposalSet& proposals);
// Sorts each position by descending score (stable) before validating.
ProposalSet proposals_from_json(const nlohmann::json& value);
// A JSON array of proposal objects, a single object, or one object per line.
std::vector<ProposalSet> read_proposals(const std::filesystem::path& path);

nlohmann::ordered_json metrics_to_json(const PredictionMetrics& metrics);

}  // namespace nsa
