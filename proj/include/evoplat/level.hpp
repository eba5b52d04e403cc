#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace evoplat {

enum class Tile : std::uint8_t {
  Empty = 0,
  Ground = 1,
  Pipe = 2,
  Coin = 3,
  Flag = 4,
  Hazard = 5,
};

// Static level geometry. Tile coordinates are (tx, ty) with ty measured from
// the bottom row; positions in GameState are sub-tile units (16 per tile).
struct LevelSpec {
  int width = 0;
  int height = 0;
  int max_time = 0;        // clock units on the timer at each (re)spawn
  int clock_divisor = 24;  // physics ticks per clock unit
  int world = 1;
  int stage = 1;
  int start_x = 0;  // tile coords
  int start_y = 0;
  int flag_x = -1;  // column of the single Flag tile
  int flag_y = -1;
  std::vector<Tile> grid;  // row-major from the bottom: grid[ty*width + tx]

  Tile tile(int tx, int ty) const { return grid[static_cast<size_t>(ty) * width + tx]; }
  bool in_bounds(int tx, int ty) const {
    return tx >= 0 && tx < width && ty >= 0 && ty < height;
  }
  int coin_count() const;

  bool operator==(const LevelSpec&) const = default;
};

// Text format: one `time=<int>` header line (optional `clock=`, `world=`,
// `stage=` lines after it), then the grid, top row first.
//   .  Empty    #  Ground    |  Pipe    o  Coin    F  Flag    ^  Hazard
//   M  start position (the cell itself is Empty)
// Throws ParseError for unreadable text, ValidationError for rule violations
// (dimensions < 4, flag count != 1, start without solid support, ...).
LevelSpec load_level(const std::string& text);
LevelSpec load_level_file(const std::string& path);

std::string dump_level(const LevelSpec& level);

}  // namespace evoplat
