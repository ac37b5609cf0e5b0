#include "nsa/grid.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "nsa/error.hpp"

namespace nsa {

using nlohmann::json;
using nlohmann::ordered_json;

Grid::Grid(int height, int width, Color fill)
    : height_(height), width_(width), cells_(static_cast<std::size_t>(height) * width, fill) {}

Grid::Grid(int height, int width, std::vector<Color> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
  if (cells_.size() != static_cast<std::size_t>(height) * width)
    throw Error(ErrorCode::RaggedGrid, "cell count does not match dimensions");
}

Grid Grid::from_rows(const std::vector<std::vector<int>>& rows, int max_side) {
  if (rows.empty() || rows.front().empty())
    throw Error(ErrorCode::RaggedGrid, "grid has no cells");
  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows.front().size());
  if (height > max_side || width > max_side)
    throw Error(ErrorCode::GridTooLarge,
                std::to_string(height) + "x" + std::to_string(width) + " exceeds " +
                    std::to_string(max_side));
  std::vector<Color> cells;
  cells.reserve(static_cast<std::size_t>(height) * width);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != width)
      throw Error(ErrorCode::RaggedGrid, "rows of unequal length");
    for (int v : row) {
      if (v < 0 || v >= kNumColors)
        throw Error(ErrorCode::ColorOutOfRange, "color " + std::to_string(v));
      cells.push_back(static_cast<Color>(v));
    }
  }
  return Grid(height, width, std::move(cells));
}

std::array<int, kNumColors> Grid::histogram() const {
  std::array<int, kNumColors> counts{};
  for (Color c : cells_) ++counts[c];
  return counts;
}

std::vector<std::vector<int>> Grid::rows() const {
  std::vector<std::vector<int>> out(height_, std::vector<int>(width_));
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c) out[r][c] = at(r, c);
  return out;
}

std::size_t grid_distance(const Grid& a, const Grid& b) {
  if (a.height() == b.height() && a.width() == b.width()) {
    const auto x = a.cells();
    const auto y = b.cells();
    std::size_t diff = 0;
    for (std::size_t i = 0; i < x.size(); ++i) diff += x[i] != y[i];
    return diff;
  }
  const int oh = std::min(a.height(), b.height());
  const int ow = std::min(a.width(), b.width());
  std::size_t diff = 0;
  for (int r = 0; r < oh; ++r)
    for (int c = 0; c < ow; ++c) diff += a.at(r, c) != b.at(r, c);
  const std::size_t overlap = static_cast<std::size_t>(oh) * ow;
  return diff + (a.size() - overlap) + (b.size() - overlap);
}

ordered_json grid_to_json(const Grid& grid) {
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < grid.height(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < grid.width(); ++c) row.push_back(static_cast<int>(grid.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Grid grid_from_json(const json& value, int max_side) {
  if (!value.is_array()) throw Error(ErrorCode::MalformedJson, "grid is not an array");
  std::vector<std::vector<int>> rows;
  rows.reserve(value.size());
  for (const auto& row : value) {
    if (!row.is_array()) throw Error(ErrorCode::MalformedJson, "grid row is not an array");
    auto& out = rows.emplace_back();
    out.reserve(row.size());
    for (const auto& cell : row) {
      if (!cell.is_number_integer())
        throw Error(ErrorCode::MalformedJson, "grid cell is not an integer");
      out.push_back(cell.get<int>());
    }
  }
  return Grid::from_rows(rows, max_side);
}

ordered_json task_to_json(const Task& task) {
  ordered_json out;
  ordered_json train = ordered_json::array();
  for (const auto& ex : task.train) {
    ordered_json pair;
    pair["input"] = grid_to_json(ex.input);
    pair["output"] = grid_to_json(ex.output);
    train.push_back(std::move(pair));
  }
  ordered_json test = ordered_json::array();
  for (const auto& ex : task.test) {
    ordered_json pair;
    pair["input"] = grid_to_json(ex.input);
    if (ex.output) pair["output"] = grid_to_json(*ex.output);
    test.push_back(std::move(pair));
  }
  out["train"] = std::move(train);
  out["test"] = std::move(test);
  return out;
}

namespace {

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::MalformedJson, std::string("missing key \"") + key + "\"");
  return obj.at(key);
}

}  // namespace

Task task_from_json(const json& value, std::string id) {
  if (!value.is_object()) throw Error(ErrorCode::MalformedJson, "task is not an object");
  const json& train = require(value, "train");
  const json& test = require(value, "test");
  if (!train.is_array() || !test.is_array())
    throw Error(ErrorCode::MalformedJson, "\"train\"/\"test\" must be arrays");
  if (train.empty()) throw Error(ErrorCode::EmptyTrainSet, "task has no train pairs");
  if (test.empty()) throw Error(ErrorCode::MalformedJson, "task has no test pairs");

  Task task;
  task.id = std::move(id);
  for (const auto& pair : train)
    task.train.push_back({grid_from_json(require(pair, "input")),
                          grid_from_json(require(pair, "output"))});
  for (const auto& pair : test) {
    TestExample ex{grid_from_json(require(pair, "input")), std::nullopt};
    if (pair.contains("output")) ex.output = grid_from_json(pair.at("output"));
    task.test.push_back(std::move(ex));
  }
  return task;
}

Task parse_task(std::string_view text, std::string id) {
  json value = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) throw Error(ErrorCode::MalformedJson, "invalid JSON");
  return task_from_json(value, std::move(id));
}

std::string serialize_task(const Task& task) { return task_to_json(task).dump(); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Task load_task_file(const std::filesystem::path& path) {
  return parse_task(read_file(path), path.stem().string());
}

std::vector<Task> load_task_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Task> tasks;
  tasks.reserve(files.size());
  for (const auto& f : files) tasks.push_back(load_task_file(f));
  return tasks;
}

}  // namespace nsa
