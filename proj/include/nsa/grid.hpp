#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace nsa {

using Color = std::uint8_t;

inline constexpr int kNumColors = 10;
// ARC grids never exceed 30 per side.
inline constexpr int kMaxArcSide = 30;
// Intermediate canvases produced by resizing primitives may grow up to this.
inline constexpr int kEngineSizeCap = 120;

// Row-major matrix of color codes 0-9.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, Color fill = 0);
  Grid(int height, int width, std::vector<Color> cells);

  // Validates shape and colors; throws Error(RaggedGrid | ColorOutOfRange | GridTooLarge).
  static Grid from_rows(const std::vector<std::vector<int>>& rows, int max_side = kMaxArcSide);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  bool empty() const noexcept { return cells_.empty(); }
  std::size_t size() const noexcept { return cells_.size(); }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  Color at(int row, int col) const noexcept {
    return cells_[static_cast<std::size_t>(row) * width_ + col];
  }
  void set(int row, int col, Color color) noexcept {
    cells_[static_cast<std::size_t>(row) * width_ + col] = color;
  }

  std::span<const Color> cells() const noexcept { return cells_; }
  std::array<int, kNumColors> histogram() const;
  std::vector<std::vector<int>> rows() const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Color> cells_;
};

struct Example {
  Grid input;
  Grid output;

  friend bool operator==(const Example&, const Example&) = default;
};

struct TestExample {
  Grid input;
  std::optional<Grid> output;  // scoring only

  friend bool operator==(const TestExample&, const TestExample&) = default;
};

struct Task {
  std::string id;
  std::vector<Example> train;
  std::vector<TestExample> test;

  friend bool operator==(const Task&, const Task&) = default;
};

// Cells differing over the top-left aligned overlap plus all cells of either
// grid outside the overlap.
std::size_t grid_distance(const Grid& a, const Grid& b);

nlohmann::ordered_json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& value, int max_side = kMaxArcSide);

nlohmann::ordered_json task_to_json(const Task& task);
Task task_from_json(const nlohmann::json& value, std::string id = {});

// ARC task JSON. Throws Error(MalformedJson | RaggedGrid | ColorOutOfRange | EmptyTrainSet).
Task parse_task(std::string_view text, std::string id = {});
// Compact JSON, "train" before "test", "input" before "output".
std::string serialize_task(const Task& task);

// Task id is the file stem.
Task load_task_file(const std::filesystem::path& path);
// All *.json files of a directory, sorted by file name.
std::vector<Task> load_task_dir(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace nsa
