#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsa/grid.hpp"
#include "nsa/program.hpp"
#include "nsa/rng.hpp"

namespace nsa {

// Rejected attempts before sample_program gives up on a source.
inline constexpr int kMaxSampleAttempts = 50;

struct GenConfig {
  std::uint64_t seed = 0;
  std::array<double, kMaxProgramSteps> length_weights{0.4, 0.4, 0.2};
  bool balance_single_primitives = true;
  std::size_t count = 100;
  std::string id_prefix = "syn";
  // Source draws per dataset slot before SourceExhausted.
  std::size_t max_slot_attempts = 2000;
};

struct SyntheticTask {
  Task task;  // last generated pair is the test pair
  Label label;
  Program program;
};

// Uniform abstraction, then per step a uniform kind (or `first_kind` for step 0),
// a filter with a non-empty selection and a parameter record, grounded on the
// state evolving over `inputs`. Steps that leave every input unchanged or fail
// to apply are rejected. Throws Error(SamplingExhausted).
Program sample_program(Rng& rng, std::span<const Grid> inputs, int length,
                       std::optional<PrimitiveKind> first_kind = std::nullopt);

// Absent when any output equals its input, any application fails, or any
// output exceeds ARC dimensions.
std::optional<SyntheticTask> generate_task(std::span<const Grid> source_inputs,
                                           const Program& program);

// Dedup key: the serialized input/output pairs.
std::string dedup_key(const Task& task);

struct Manifest {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::array<double, kMaxProgramSteps> length_weights{};
  bool balance_single_primitives = true;
  std::vector<std::string> sources;
  std::array<std::size_t, kMaxProgramSteps> counts_per_length{};
  std::map<std::string, std::size_t> counts_per_first_kind;
  std::size_t attempts = 0;
};

struct Dataset {
  std::vector<SyntheticTask> records;
  Manifest manifest;
};

// Exactly config.count unique tasks with per-length quotas from the weights.
// Throws Error(SourceExhausted).
Dataset generate_dataset(const GenConfig& config, std::span<const Task> sources);

// Same pipeline restricted to the inputs of one task.
Dataset generate_tta_set(const Task& task, std::size_t n, std::uint64_t seed);

// Every train and test input of the task, in file order.
std::vector<Grid> task_inputs(const Task& task);

nlohmann::ordered_json record_to_json(const SyntheticTask& record);
SyntheticTask record_from_json(const nlohmann::json& value);
nlohmann::ordered_json manifest_to_json(const Manifest& manifest);

// One JSON record per line.
std::string dataset_to_jsonl(std::span<const SyntheticTask> records);
std::vector<SyntheticTask> read_dataset(const std::filesystem::path& path);

}  // namespace nsa
