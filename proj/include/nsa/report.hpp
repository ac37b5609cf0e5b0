#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsa/search.hpp"

namespace nsa {

struct TaskReport {
  std::string task_id;
  bool solved = false;
  std::optional<Program> program;
  std::size_t expansions = 0;
  double wall_seconds = 0.0;
  std::optional<std::vector<Grid>> test_outputs;
};

struct RunReport {
  std::vector<TaskReport> tasks;
  std::size_t solved = 0;
  std::size_t total = 0;
  double mean_expansions = 0.0;
  double mean_wall_seconds = 0.0;
};

TaskReport make_task_report(std::string task_id, const SolveResult& result);
RunReport aggregate(std::vector<TaskReport> tasks);

nlohmann::ordered_json task_report_to_json(const TaskReport& report);
TaskReport task_report_from_json(const nlohmann::json& value);
nlohmann::ordered_json run_report_to_json(const RunReport& report);
RunReport run_report_from_json(const nlohmann::json& value);

}  // namespace nsa
