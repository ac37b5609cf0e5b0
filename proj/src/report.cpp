#include "nsa/report.hpp"

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

TaskReport make_task_report(std::string task_id, const SolveResult& result) {
  TaskReport r;
  r.task_id = std::move(task_id);
  r.solved = result.solution.has_value();
  r.expansions = result.stats.expansions;
  r.wall_seconds = result.stats.wall_seconds;
  if (result.solution) {
    r.program = result.solution->program;
    r.test_outputs = result.solution->test_outputs;
  }
  return r;
}

RunReport aggregate(std::vector<TaskReport> tasks) {
  RunReport run;
  run.tasks = std::move(tasks);
  run.total = run.tasks.size();
  for (const auto& t : run.tasks) {
    run.solved += t.solved;
    run.mean_expansions += static_cast<double>(t.expansions);
    run.mean_wall_seconds += t.wall_seconds;
  }
  if (run.total > 0) {
    run.mean_expansions /= static_cast<double>(run.total);
    run.mean_wall_seconds /= static_cast<double>(run.total);
  }
  return run;
}

ordered_json task_report_to_json(const TaskReport& report) {
  ordered_json out;
  out["task_id"] = report.task_id;
  out["solved"] = report.solved;
  if (report.program) out["program"] = program_to_json(*report.program);
  out["expansions"] = report.expansions;
  out["wall_seconds"] = report.wall_seconds;
  if (report.test_outputs) {
    ordered_json outputs = ordered_json::array();
    for (const auto& g : *report.test_outputs) outputs.push_back(grid_to_json(g));
    out["test_outputs"] = std::move(outputs);
  }
  return out;
}

TaskReport task_report_from_json(const json& value) {
  try {
    TaskReport r;
    r.task_id = value.at("task_id").get<std::string>();
    r.solved = value.at("solved").get<bool>();
    if (value.contains("program")) r.program = program_from_json(value.at("program"));
    r.expansions = value.at("expansions").get<std::size_t>();
    r.wall_seconds = value.at("wall_seconds").get<double>();
    if (value.contains("test_outputs")) {
      std::vector<Grid> outputs;
      for (const auto& g : value.at("test_outputs")) outputs.push_back(grid_from_json(g));
      r.test_outputs = std::move(outputs);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("task report: ") + e.what());
  }
}

ordered_json run_report_to_json(const RunReport& report) {
  ordered_json out;
  out["solved"] = report.solved;
  out["total"] = report.total;
  out["mean_expansions"] = report.mean_expansions;
  out["mean_wall_seconds"] = report.mean_wall_seconds;
  ordered_json rows = ordered_json::array();
  for (const auto& t : report.tasks) rows.push_back(task_report_to_json(t));
  out["tasks"] = std::move(rows);
  return out;
}

RunReport run_report_from_json(const json& value) {
  try {
    RunReport r;
    for (const auto& row : value.at("tasks")) r.tasks.push_back(task_report_from_json(row));
    r.solved = value.at("solved").get<std::size_t>();
    r.total = value.at("total").get<std::size_t>();
    r.mean_expansions = value.at("mean_expansions").get<double>();
    r.mean_wall_seconds = value.at("mean_wall_seconds").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("run report: ") + e.what());
  }
}

}  // namespace nsa
