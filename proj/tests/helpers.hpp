#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "evoplat/level.hpp"

namespace testutil {

inline std::string repo_path(const std::string& rel) {
  return std::string(EVOPLAT_REPO_DIR) + "/" + rel;
}

// Unique writable directory per call; safe under parallel ctest.
inline std::string fresh_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("evoplat_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// Flat runway: full ground row, start at (2,1), flag at (flag_col,1).
inline evoplat::LevelSpec runway(int width, int flag_col, int max_time = 400,
                                 int clock_divisor = 24) {
  evoplat::LevelSpec level;
  level.width = width;
  level.height = 4;
  level.max_time = max_time;
  level.clock_divisor = clock_divisor;
  level.start_x = 2;
  level.start_y = 1;
  level.flag_x = flag_col;
  level.flag_y = 1;
  level.grid.assign(static_cast<std::size_t>(width) * 4, evoplat::Tile::Empty);
  for (int tx = 0; tx < width; ++tx) level.grid[static_cast<std::size_t>(tx)] =
      evoplat::Tile::Ground;
  level.grid[static_cast<std::size_t>(width) + flag_col] = evoplat::Tile::Flag;
  return level;
}

// 12-tile runway whose flag needs 64 units of travel: out of reach for an
// 8-move walk, so short-genome searches optimize distance instead.
inline evoplat::LevelSpec tiny_level() { return runway(12, 10); }

}  // namespace testutil
