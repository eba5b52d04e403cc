#include "evoplat/level.hpp"

#include <algorithm>

#include "evoplat/errors.hpp"
#include "evoplat/util.hpp"

namespace evoplat {

namespace {

constexpr long long kMaxCells = 10'000'000;

Tile glyph_to_tile(char c, size_t row, size_t col) {
  switch (c) {
    case '.': return Tile::Empty;
    case '#': return Tile::Ground;
    case '|': return Tile::Pipe;
    case 'o': return Tile::Coin;
    case 'F': return Tile::Flag;
    case '^': return Tile::Hazard;
    default:
      throw ParseError("unknown glyph '" + std::string(1, c) + "' at row " +
                       std::to_string(row) + ", column " + std::to_string(col));
  }
}

char tile_to_glyph(Tile t) {
  switch (t) {
    case Tile::Empty: return '.';
    case Tile::Ground: return '#';
    case Tile::Pipe: return '|';
    case Tile::Coin: return 'o';
    case Tile::Flag: return 'F';
    case Tile::Hazard: return '^';
  }
  return '?';
}

bool is_header_line(const std::string& line) {
  size_t eq = line.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  // Header keys are lowercase identifiers; anything else is grid content.
  for (size_t i = 0; i < eq; ++i) {
    char c = line[i];
    if (!(c >= 'a' && c <= 'z') && c != '_') return false;
  }
  return true;
}

}  // namespace

int LevelSpec::coin_count() const {
  return static_cast<int>(std::count(grid.begin(), grid.end(), Tile::Coin));
}

LevelSpec load_level(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty level text");

  LevelSpec lv;
  lv.max_time = -1;
  size_t i = 0;
  for (; i < lines.size() && is_header_line(lines[i]); ++i) {
    size_t eq = lines[i].find('=');
    std::string key = trim(lines[i].substr(0, eq));
    std::string value = trim(lines[i].substr(eq + 1));
    if (key == "time") {
      lv.max_time = static_cast<int>(parse_int(value, "time"));
    } else if (key == "clock") {
      lv.clock_divisor = static_cast<int>(parse_int(value, "clock"));
    } else if (key == "world") {
      lv.world = static_cast<int>(parse_int(value, "world"));
    } else if (key == "stage") {
      lv.stage = static_cast<int>(parse_int(value, "stage"));
    } else {
      throw ParseError("unknown level header key '" + key + "'");
    }
  }
  if (lv.max_time < 0) throw ParseError("missing time=<int> header line");
  if (i >= lines.size()) throw ParseError("level has no grid rows");

  std::vector<std::string> rows(lines.begin() + static_cast<long>(i), lines.end());
  size_t width = rows[0].size();
  if (width == 0) throw ParseError("empty grid row");
  lv.height = static_cast<int>(rows.size());
  lv.width = static_cast<int>(width);
  if (static_cast<long long>(lv.width) * lv.height > kMaxCells)
    throw ValidationError("level exceeds cell limit");

  lv.grid.assign(static_cast<size_t>(lv.width) * lv.height, Tile::Empty);
  int starts = 0, flags = 0;
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw ParseError("ragged grid: row " + std::to_string(r) + " has length " +
                       std::to_string(rows[r].size()) + ", expected " +
                       std::to_string(width));
    int ty = lv.height - 1 - static_cast<int>(r);
    for (size_t c = 0; c < width; ++c) {
      char g = rows[r][c];
      int tx = static_cast<int>(c);
      if (g == 'M') {
        ++starts;
        lv.start_x = tx;
        lv.start_y = ty;
        continue;  // cell stays Empty
      }
      Tile t = glyph_to_tile(g, r, c);
      if (t == Tile::Flag) {
        ++flags;
        lv.flag_x = tx;
        lv.flag_y = ty;
      }
      lv.grid[static_cast<size_t>(ty) * lv.width + tx] = t;
    }
  }

  if (lv.width < 4 || lv.height < 4)
    throw ValidationError("level must be at least 4x4, got " +
                          std::to_string(lv.width) + "x" + std::to_string(lv.height));
  if (lv.max_time < 1) throw ValidationError("time must be >= 1");
  if (lv.clock_divisor < 1) throw ValidationError("clock must be >= 1");
  if (flags != 1)
    throw ValidationError("level must contain exactly one flag, found " +
                          std::to_string(flags));
  if (starts != 1)
    throw ValidationError("level must contain exactly one start marker, found " +
                          std::to_string(starts));
  if (lv.start_y < 1)
    throw ValidationError("start cell has nothing beneath it");
  Tile below = lv.tile(lv.start_x, lv.start_y - 1);
  if (below != Tile::Ground && below != Tile::Pipe)
    throw ValidationError("start cell must rest on Ground or Pipe");
  return lv;
}

LevelSpec load_level_file(const std::string& path) {
  return load_level(read_text_file(path));
}

std::string dump_level(const LevelSpec& level) {
  std::string out;
  out += "time=" + std::to_string(level.max_time) + "\n";
  out += "clock=" + std::to_string(level.clock_divisor) + "\n";
  if (level.world != 1) out += "world=" + std::to_string(level.world) + "\n";
  if (level.stage != 1) out += "stage=" + std::to_string(level.stage) + "\n";
  for (int ty = level.height - 1; ty >= 0; --ty) {
    for (int tx = 0; tx < level.width; ++tx) {
      if (tx == level.start_x && ty == level.start_y) {
        out += 'M';
      } else {
        out += tile_to_glyph(level.tile(tx, ty));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace evoplat
