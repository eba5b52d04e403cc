#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "evoplat/errors.hpp"
#include "evoplat/level.hpp"
#include "helpers.hpp"

using namespace evoplat;

namespace {

const std::string kMinimal =
    "time=400\n"
    "....\n"
    "...F\n"
    ".M..\n"
    "####\n";

}  // namespace

TEST_CASE("bundled level parses with expected geometry") {
  LevelSpec lv = load_level_file(testutil::repo_path("levels/w1l1.txt"));
  CHECK(lv.width == 60);
  CHECK(lv.height == 8);
  CHECK(lv.max_time == 400);
  CHECK(lv.clock_divisor == 24);
  CHECK(lv.world == 1);
  CHECK(lv.stage == 1);
  CHECK(lv.start_x == 2);
  CHECK(lv.start_y == 1);
  CHECK(lv.flag_x == 58);
  CHECK(lv.flag_y == 1);
  CHECK(lv.coin_count() == 3);
  CHECK(lv.tile(5, 2) == Tile::Coin);
  CHECK(lv.tile(16, 2) == Tile::Coin);
  CHECK(lv.tile(17, 2) == Tile::Coin);
  CHECK(lv.tile(12, 1) == Tile::Pipe);
  CHECK(lv.tile(30, 1) == Tile::Pipe);
  CHECK(lv.tile(58, 1) == Tile::Flag);
  for (int tx = 0; tx < lv.width; ++tx) CHECK(lv.tile(tx, 0) == Tile::Ground);
  // Start cell itself is empty; the marker only sets the spawn point.
  CHECK(lv.tile(2, 1) == Tile::Empty);
  CHECK(lv.in_bounds(0, 0));
  CHECK(lv.in_bounds(59, 7));
  CHECK_FALSE(lv.in_bounds(-1, 0));
  CHECK_FALSE(lv.in_bounds(60, 0));
  CHECK_FALSE(lv.in_bounds(0, 8));
}

TEST_CASE("dump then load is the identity") {
  LevelSpec lv = load_level_file(testutil::repo_path("levels/w1l1.txt"));
  LevelSpec again = load_level(dump_level(lv));
  CHECK(again == lv);
  CHECK(dump_level(again) == dump_level(lv));

  LevelSpec tiny = load_level(kMinimal);
  CHECK(load_level(dump_level(tiny)) == tiny);
}

TEST_CASE("minimal 4x4 level is accepted; defaults apply") {
  LevelSpec lv = load_level(kMinimal);
  CHECK(lv.width == 4);
  CHECK(lv.height == 4);
  CHECK(lv.clock_divisor == 24);  // default when no clock= header
  CHECK(lv.world == 1);
  CHECK(lv.stage == 1);
  CHECK(lv.start_x == 1);
  CHECK(lv.start_y == 1);
  CHECK(lv.flag_x == 3);
  CHECK(lv.flag_y == 2);
}

TEST_CASE("optional headers are honored") {
  LevelSpec lv = load_level(
      "time=77\nclock=5\nworld=3\nstage=2\n....\n...F\n.M..\n####\n");
  CHECK(lv.max_time == 77);
  CHECK(lv.clock_divisor == 5);
  CHECK(lv.world == 3);
  CHECK(lv.stage == 2);
}

TEST_CASE("parse errors name the offending construct") {
  CHECK_THROWS_AS(load_level(""), ParseError);
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n..XF\n.M..\n####\n"),
                       doctest::Contains("unknown glyph 'X'"), ParseError);
  CHECK_THROWS_WITH_AS(load_level("time=400\nfoo=1\n....\n...F\n.M..\n####\n"),
                       doctest::Contains("unknown level header key 'foo'"),
                       ParseError);
  CHECK_THROWS_WITH_AS(load_level("clock=24\n....\n...F\n.M..\n####\n"),
                       doctest::Contains("missing time="), ParseError);
  CHECK_THROWS_WITH_AS(load_level("time=400\n"), doctest::Contains("no grid rows"),
                       ParseError);
  CHECK_THROWS_WITH_AS(load_level("time=400\n\n....\n...F\n.M..\n####\n"),
                       doctest::Contains("empty grid row"), ParseError);
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n...F\n.M.\n####\n"),
                       doctest::Contains("ragged grid"), ParseError);
  CHECK_THROWS_AS(load_level("time=abc\n....\n...F\n.M..\n####\n"), ConfigError);
}

TEST_CASE("validation errors cover shape and marker rules") {
  // Too small.
  CHECK_THROWS_WITH_AS(load_level("time=400\n...\n..F\nM##\n"),
                       doctest::Contains("at least 4x4"), ValidationError);
  // Bad scalar headers.
  CHECK_THROWS_WITH_AS(load_level("time=0\n....\n...F\n.M..\n####\n"),
                       doctest::Contains("time must be >= 1"), ValidationError);
  CHECK_THROWS_WITH_AS(load_level("time=400\nclock=0\n....\n...F\n.M..\n####\n"),
                       doctest::Contains("clock must be >= 1"), ValidationError);
  // Flag count.
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n....\n.M..\n####\n"),
                       doctest::Contains("exactly one flag, found 0"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n..FF\n.M..\n####\n"),
                       doctest::Contains("exactly one flag, found 2"),
                       ValidationError);
  // Start count.
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n...F\n....\n####\n"),
                       doctest::Contains("exactly one start marker, found 0"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n...F\n.MM.\n####\n"),
                       doctest::Contains("exactly one start marker, found 2"),
                       ValidationError);
  // Start on the bottom row has no supporting cell.
  CHECK_THROWS_WITH_AS(load_level("time=400\n....\n...F\n....\n.M##\n"),
                       doctest::Contains("nothing beneath"), ValidationError);
  // Start standing on empty space.
  CHECK_THROWS_WITH_AS(load_level("time=400\n.M..\n...F\n....\n####\n"),
                       doctest::Contains("rest on Ground or Pipe"),
                       ValidationError);
  // Start on a pipe is fine.
  LevelSpec onPipe = load_level("time=400\n.M..\n.|.F\n....\n####\n");
  CHECK(onPipe.start_y == 3);
  CHECK(onPipe.tile(1, 2) == Tile::Pipe);
}

TEST_CASE("oversized grids are rejected before allocation") {
  std::string text = "time=400\n";
  text += std::string(3'000'000, '.');
  text += "\n.\n.\n.\n";
  CHECK_THROWS_WITH_AS(load_level(text), doctest::Contains("cell limit"),
                       ValidationError);
}

TEST_CASE("all glyphs round-trip through their tiles") {
  LevelSpec lv = load_level(
      "time=9\n"
      "o^.F\n"
      "|...\n"
      ".M..\n"
      "####\n");
  CHECK(lv.tile(0, 3) == Tile::Coin);
  CHECK(lv.tile(1, 3) == Tile::Hazard);
  CHECK(lv.tile(3, 3) == Tile::Flag);
  CHECK(lv.tile(0, 2) == Tile::Pipe);
  CHECK(lv.tile(0, 0) == Tile::Ground);
  CHECK(lv.tile(2, 2) == Tile::Empty);
  CHECK(load_level(dump_level(lv)) == lv);
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(load_level_file("/nonexistent/definitely_missing.txt"),
                  IoError);
}
