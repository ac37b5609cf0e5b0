#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nsa/error.hpp"
#include "nsa/grid.hpp"
#include "nsa/proposals.hpp"
#include "nsa/report.hpp"
#include "nsa/search.hpp"
#include "nsa/taskgen.hpp"

namespace fs = std::filesystem;

namespace {

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text << '\n';
  else
    nsa::write_file(out, text + "\n");
}

// A directory of ARC JSON files or a JSONL dataset of synthetic tasks.
std::vector<nsa::Task> load_tasks(const fs::path& source) {
  if (fs::is_directory(source)) return nsa::load_task_dir(source);
  if (!fs::exists(source)) throw nsa::Error(nsa::ErrorCode::Io, "no such path " + source.string());
  if (source.extension() == ".json") return {nsa::load_task_file(source)};
  std::vector<nsa::Task> tasks;
  for (auto& record : nsa::read_dataset(source)) tasks.push_back(std::move(record.task));
  return tasks;
}

struct SolveOptions {
  std::string source;
  std::string out;
  double budget_seconds = 1800.0;
  std::string proposals;
  int max_depth = nsa::kMaxProgramSteps;
  unsigned workers = 1;
  std::size_t node_budget = 0;
};

int cmd_solve(const SolveOptions& opt) {
  const auto tasks = load_tasks(opt.source);
  std::map<std::string, nsa::ProposalSet> proposals;
  if (!opt.proposals.empty())
    for (auto& p : nsa::read_proposals(opt.proposals)) proposals[p.task_id] = std::move(p);

  nsa::SearchConfig base;
  base.time_budget_seconds = opt.budget_seconds;
  base.max_depth = opt.max_depth;
  base.node_budget = opt.node_budget;

  std::vector<nsa::SearchConfig> configs(tasks.size(), base);
  for (std::size_t i = 0; i < tasks.size() && !proposals.empty(); ++i) {
    auto it = proposals.find(tasks[i].id);
    if (it == proposals.end()) {
      std::cerr << "warning: no proposal for " << tasks[i].id << ", searching unrestricted\n";
      continue;
    }
    configs[i] = nsa::restrict_config(base, nsa::expand_topk(it->second));
    configs[i].max_depth = std::min(configs[i].max_depth, opt.max_depth);
  }

  std::vector<nsa::TaskReport> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      rows[i] = nsa::make_task_report(tasks[i].id, nsa::solve(tasks[i], configs[i]));
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.workers, tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto run = nsa::aggregate(std::move(rows));
  emit(nsa::run_report_to_json(run).dump(2), opt.out);
  std::cerr << "solved " << run.solved << "/" << run.total << ", mean expansions "
            << run.mean_expansions << "\n";
  return 0;
}

struct GenOptions {
  std::string sources;
  std::string tta_task;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
  std::string id_prefix = "syn";
  bool no_balance = false;
};

int cmd_gen(const GenOptions& opt) {
  nsa::Dataset data;
  if (!opt.tta_task.empty()) {
    data = nsa::generate_tta_set(nsa::load_task_file(opt.tta_task), opt.count, opt.seed);
  } else {
    if (opt.sources.empty()) throw nsa::Error(nsa::ErrorCode::Io, "gen needs --sources or --tta-task");
    nsa::GenConfig config;
    config.seed = opt.seed;
    config.count = opt.count;
    config.id_prefix = opt.id_prefix;
    config.balance_single_primitives = !opt.no_balance;
    data = nsa::generate_dataset(config, nsa::load_task_dir(opt.sources));
  }
  const std::string jsonl = nsa::dataset_to_jsonl(data.records);
  if (opt.out.empty() || opt.out == "-")
    std::cout << jsonl;
  else
    nsa::write_file(opt.out, jsonl);
  const auto manifest = nsa::manifest_to_json(data.manifest).dump(2);
  if (!opt.manifest.empty()) nsa::write_file(opt.manifest, manifest + "\n");
  const auto& m = data.manifest;
  std::cerr << "generated " << data.records.size() << " tasks (lengths " << m.counts_per_length[0]
            << "/" << m.counts_per_length[1] << "/" << m.counts_per_length[2] << ", "
            << m.attempts << " attempts)\n";
  return 0;
}

std::vector<std::pair<std::string, nsa::Label>> dataset_labels(const std::string& path) {
  std::vector<std::pair<std::string, nsa::Label>> truths;
  for (const auto& r : nsa::read_dataset(path)) truths.emplace_back(r.task.id, r.label);
  return truths;
}

int cmd_score(const std::string& proposals_path, const std::string& dataset, const std::string& out) {
  const auto proposals = nsa::read_proposals(proposals_path);
  const auto truths = dataset_labels(dataset);
  emit(nsa::metrics_to_json(nsa::score_dataset(proposals, truths)).dump(2), out);
  return 0;
}

int cmd_oracle(const std::string& dataset, const std::string& out) {
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (const auto& [id, label] : dataset_labels(dataset))
    all.push_back(nsa::proposals_to_json(nsa::oracle_proposals(label, id)));
  emit(all.dump(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neurosymbolic ARC solver"};
  app.require_subcommand(1);

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Search for a program per task");
  s->add_option("tasks", solve.source, "Task directory, task file or JSONL dataset")->required();
  s->add_option("--out", solve.out, "Run report path (stdout when omitted)");
  s->add_option("--budget-seconds", solve.budget_seconds, "Wall-clock budget per task")
      ->check(CLI::PositiveNumber);
  s->add_option("--proposals", solve.proposals, "Proposal JSON restricting the primitives");
  s->add_option("--max-depth", solve.max_depth, "Maximum program length")->check(CLI::Range(1, 3));
  s->add_option("--workers", solve.workers, "Tasks solved in parallel")->check(CLI::PositiveNumber);
  s->add_option("--node-budget", solve.node_budget, "Maximum expansions per task (0 = unbounded)");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic task dataset");
  g->add_option("--sources", gen.sources, "Directory of ARC tasks providing input grids");
  g->add_option("--tta-task", gen.tta_task, "Generate from the inputs of this task only");
  g->add_option("--count", gen.count, "Number of tasks")->required();
  g->add_option("--seed", gen.seed, "Random seed")->required();
  g->add_option("--out", gen.out, "JSONL output (stdout when omitted)");
  g->add_option("--manifest", gen.manifest, "Manifest JSON output");
  g->add_option("--id-prefix", gen.id_prefix, "Task id prefix");
  g->add_flag("--no-balance", gen.no_balance, "Do not balance single-primitive tasks");

  std::string proposals_path, dataset_path, out_path;
  auto* sc = app.add_subcommand("score", "Prediction inclusion and rank of proposals");
  sc->add_option("--proposals", proposals_path, "Proposal JSON")->required();
  sc->add_option("--dataset", dataset_path, "JSONL dataset with labels")->required();
  sc->add_option("--out", out_path, "Metrics path (stdout when omitted)");

  auto* o = app.add_subcommand("oracle-proposals", "Perfect proposals from dataset labels");
  o->add_option("--dataset", dataset_path, "JSONL dataset with labels")->required();
  o->add_option("--out", out_path, "Proposal JSON path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (s->parsed()) return cmd_solve(solve);
    if (g->parsed()) return cmd_gen(gen);
    if (sc->parsed()) return cmd_score(proposals_path, dataset_path, out_path);
    if (o->parsed()) return cmd_oracle(dataset_path, out_path);
  } catch (const nsa::Error& e) {
    std::cerr << "error: " << nsa::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
