#pragma once

#include <random>
#include <string>
#include <vector>

#include "nsa/abstraction.hpp"
#include "nsa/grid.hpp"

namespace testing {

inline nsa::Grid grid(const std::vector<std::vector<int>>& rows) {
  return nsa::Grid::from_rows(rows, nsa::kEngineSizeCap);
}

inline nsa::Grid random_grid(std::mt19937& rng, int max_side, int colors = nsa::kNumColors,
                             double background_share = 0.0) {
  std::uniform_int_distribution<int> side(1, max_side);
  std::uniform_int_distribution<int> color(0, colors - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  nsa::Grid g(side(rng), side(rng));
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      g.set(r, c, coin(rng) < background_share ? 0 : static_cast<nsa::Color>(color(rng)));
  return g;
}

inline nsa::Task make_task(std::vector<nsa::Example> train, std::vector<nsa::Grid> tests,
                           std::string id = "t") {
  nsa::Task t;
  t.id = std::move(id);
  t.train = std::move(train);
  for (auto& g : tests) t.test.push_back({std::move(g), std::nullopt});
  return t;
}

inline std::string data_dir() { return NSA_DATA_DIR; }
inline std::string test_data_dir() { return NSA_TEST_DATA_DIR; }

}  // namespace testing
