#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "evoplat/cli.hpp"
#include "evoplat/errors.hpp"
#include "evoplat/level.hpp"
#include "evoplat/util.hpp"
#include "helpers.hpp"

using namespace evoplat;
namespace fs = std::filesystem;

namespace {

// The commands narrate to stdout; keep the test log clean and inspectable.
struct CoutCapture {
  std::ostringstream sink;
  std::streambuf* saved;
  CoutCapture() : saved(std::cout.rdbuf(sink.rdbuf())) {}
  ~CoutCapture() { std::cout.rdbuf(saved); }
  std::string str() const { return sink.str(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::string ga_ini(const std::string& output_dir) {
  return "[run]\n"
         "algorithm = GA\n"
         "level = " + testutil::repo_path("levels/w1l1.txt") + "\n"
         "repeats = 2\n"
         "seeds = 1 2\n"
         "output_dir = " + output_dir + "\n"
         "\n"
         "[GA]\n"
         "population_size = 8\n"
         "generation_amount = 4\n"
         "moves_amount = 60\n";
}

std::string budgeted_ini(const char* algorithm, const std::string& output_dir) {
  std::string text =
      "[run]\n"
      "algorithm = " + std::string(algorithm) + "\n"
      "level = " + testutil::repo_path("levels/w1l1.txt") + "\n"
      "repeats = 1\n"
      "seeds = 1\n"
      "wall_clock_budget = 0\n"
      "output_dir = " + output_dir + "\n";
  if (std::string(algorithm) == "GA") {
    text += "\n[GA]\npopulation_size = 8\ngeneration_amount = 50\nmoves_amount = 60\n";
  } else {
    text +=
        "move_budget = 60\n"
        "generations = 50\n"
        "\n[NEAT]\npop_size = 8\n";
  }
  return text;
}

}  // namespace

TEST_CASE("generated levels are deterministic, loadable, and structurally sound") {
  const LevelSpec a = make_level(60, 3, 2, 7);
  const LevelSpec b = make_level(60, 3, 2, 7);
  CHECK(a == b);
  CHECK(make_level(60, 3, 2, 8) != a);

  CHECK(a.width == 60);
  CHECK(a.height == 8);
  CHECK(a.max_time == 400);
  CHECK(a.clock_divisor == 24);
  CHECK(a.start_x == 2);
  CHECK(a.start_y == 1);
  CHECK(a.flag_x == 58);
  CHECK(a.flag_y == 1);

  // Full ground row, flag in place, obstacles and coins where promised,
  // nothing else anywhere.
  std::vector<int> pipe_cols;
  int coins_found = 0;
  for (int ty = 0; ty < a.height; ++ty) {
    for (int tx = 0; tx < a.width; ++tx) {
      const Tile t = a.tile(tx, ty);
      if (ty == 0) {
        CHECK(t == Tile::Ground);
        continue;
      }
      if (tx == a.flag_x && ty == a.flag_y) {
        CHECK(t == Tile::Flag);
        continue;
      }
      switch (t) {
        case Tile::Empty:
          break;
        case Tile::Pipe:
          CHECK(ty == 1);
          pipe_cols.push_back(tx);
          break;
        case Tile::Coin:
          CHECK((ty == 2 || ty == 3));
          CHECK(tx >= 4);
          CHECK(tx <= a.width - 4);
          ++coins_found;
          break;
        default:
          FAIL("unexpected tile in generated level");
      }
    }
  }
  CHECK(coins_found == 3);
  REQUIRE(pipe_cols.size() == 2);
  CHECK(pipe_cols[0] >= 12);
  CHECK(pipe_cols[1] <= a.width - 8);
  CHECK(pipe_cols[1] - pipe_cols[0] >= 6);

  // Text round trip.
  const std::string dir = testutil::fresh_dir("mklvl_rt");
  write_file(dir + "/lvl.txt", dump_level(a));
  CHECK(load_level_file(dir + "/lvl.txt") == a);

  // Rejections: too narrow, negative counts, more obstacles or coins than fit.
  CHECK_THROWS_AS(make_level(9, 0, 0, 1), ValidationError);
  CHECK_THROWS_AS(make_level(40, -1, 0, 1), ValidationError);
  CHECK_THROWS_AS(make_level(40, 0, -1, 1), ValidationError);
  CHECK_THROWS_AS(make_level(20, 0, 2, 1), ValidationError);
  CHECK_THROWS_AS(make_level(10, 7, 0, 1), ValidationError);

  // Tight fits still work.
  const LevelSpec tight = make_level(10, 6, 0, 2);
  int tight_coins = 0;
  for (int ty = 2; ty <= 3; ++ty)
    for (int tx = 4; tx <= 6; ++tx)
      tight_coins += tight.tile(tx, ty) == Tile::Coin ? 1 : 0;
  CHECK(tight_coins == 6);
  const LevelSpec one_pipe = make_level(25, 0, 1, 3);
  for (int tx = 0; tx < one_pipe.width; ++tx) {
    if (one_pipe.tile(tx, 1) == Tile::Pipe) {
      CHECK(tx >= 12);
      CHECK(tx <= 17);
    }
  }
}

TEST_CASE("the level generator command writes files and rejects impossible requests") {
  const std::string dir = testutil::fresh_dir("mklvl_cmd");
  const std::string out = dir + "/gen.txt";
  CoutCapture cap;
  CHECK(cmd_make_level(out, 40, 2, 1, 3) == 0);
  CHECK(fs::exists(out));
  CHECK(load_level_file(out) == make_level(40, 2, 1, 3));
  CHECK(cap.str().find("wrote ") != std::string::npos);

  const std::string bad = dir + "/bad.txt";
  CHECK(cmd_make_level(bad, 9, 0, 0, 1) == 2);
  CHECK(!fs::exists(bad));
}

TEST_CASE("training runs from a config file and honors the overrides") {
  const std::string dir_a = testutil::fresh_dir("train_a");
  const std::string cfg_dir = testutil::fresh_dir("train_cfg");
  const std::string cfg = cfg_dir + "/run.ini";
  write_file(cfg, ga_ini(dir_a));

  CoutCapture cap;
  CHECK(cmd_train({cfg, "", 0}) == 0);
  for (const char* name : {"run_1.csv", "run_2.csv", "best_1.replay",
                           "best_2.replay", "summary.csv", "stats.csv",
                           "fitness.svg"})
    CHECK(fs::exists(fs::path(dir_a) / name));
  CHECK(cap.str().find("seed=1 generation=0") != std::string::npos);
  CHECK(cap.str().find("success_rate=") != std::string::npos);

  // --out redirects everything; the configured directory is left alone.
  const std::string dir_b = cfg_dir + "/override_out";
  CHECK(cmd_train({cfg, dir_b, 0}) == 0);
  CHECK(fs::exists(fs::path(dir_b) / "fitness.svg"));

  // A seed offset renames the folds.
  const std::string dir_c = cfg_dir + "/offset_out";
  CHECK(cmd_train({cfg, dir_c, 10}) == 0);
  CHECK(fs::exists(fs::path(dir_c) / "run_11.csv"));
  CHECK(fs::exists(fs::path(dir_c) / "run_12.csv"));
  CHECK(!fs::exists(fs::path(dir_c) / "run_1.csv"));
}

TEST_CASE("training distinguishes config errors from runtime failures") {
  const std::string dir = testutil::fresh_dir("train_bad");
  CoutCapture cap;

  // Misspelled key.
  const std::string bad_key = dir + "/bad_key.ini";
  write_file(bad_key, "[run]\nalgorithm = GA\nlevel = x\noutput_dir = y\n"
                      "[GA]\npoulation_size = 8\n");
  CHECK(cmd_train({bad_key, "", 0}) == 2);

  // Unreadable level.
  const std::string no_level = dir + "/no_level.ini";
  write_file(no_level, "[run]\nalgorithm = GA\nlevel = " + dir +
                           "/missing.txt\noutput_dir = " + dir + "/out\n");
  CHECK(cmd_train({no_level, "", 0}) == 2);

  // No output directory anywhere.
  const std::string no_out = dir + "/no_out.ini";
  write_file(no_out, "[run]\nalgorithm = GA\nlevel = " +
                         testutil::repo_path("levels/w1l1.txt") + "\n");
  CHECK(cmd_train({no_out, "", 0}) == 2);

  // Missing config file itself.
  CHECK(cmd_train({dir + "/absent.ini", "", 0}) == 2);

  // Valid config, but the output directory cannot be created: that is a
  // runtime failure, not a config one.
  write_file(dir + "/blocker", "not a directory\n");
  const std::string blocked = dir + "/blocked.ini";
  write_file(blocked, ga_ini(dir + "/blocker/out"));
  CHECK(cmd_train({blocked, "", 0}) == 3);
}

TEST_CASE("replays verify stored headers against a fresh simulation") {
  // Train once to get a genuine replay with a full header.
  const std::string out = testutil::fresh_dir("replay_out");
  const std::string cfg_dir = testutil::fresh_dir("replay_cfg");
  write_file(cfg_dir + "/run.ini", ga_ini(out));
  {
    CoutCapture cap;
    REQUIRE(cmd_train({cfg_dir + "/run.ini", "", 0}) == 0);
  }
  const std::string replay_path = out + "/best_1.replay";
  const std::string original = read_text_file(replay_path);

  {
    CoutCapture cap;
    CHECK(cmd_replay(replay_path, "") == 0);
    CHECK(cap.str().find("fitness=") != std::string::npos);
    CHECK(cap.str().find('#') != std::string::npos);  // ground row rendered
    CHECK(cap.str().find("divergence:") == std::string::npos);
  }

  // Tamper with the recorded fitness: replay detects the divergence.
  const auto pos = original.find("\nfitness=");
  REQUIRE(pos != std::string::npos);
  const auto eol = original.find('\n', pos + 1);
  const std::string tampered = original.substr(0, pos) + "\nfitness=123456.5" +
                               original.substr(eol);
  write_file(cfg_dir + "/tampered.replay", tampered);
  {
    CoutCapture cap;
    CHECK(cmd_replay(cfg_dir + "/tampered.replay", "") == 4);
    CHECK(cap.str().find("divergence: fitness") != std::string::npos);
  }

  // A malformed action line is an input error.
  write_file(cfg_dir + "/bad_action.replay", original + "9\n");
  CHECK(cmd_replay(cfg_dir + "/bad_action.replay", "") == 2);

  // Missing file.
  CHECK(cmd_replay(cfg_dir + "/absent.replay", "") == 2);

  // Replaying against a different level must not crash; headers may diverge.
  const std::string other_level = cfg_dir + "/other.txt";
  write_file(other_level, dump_level(make_level(40, 0, 0, 1)));
  {
    CoutCapture cap;
    const int rc = cmd_replay(replay_path, other_level);
    CHECK((rc == 0 || rc == 4));
  }
}

TEST_CASE("a bare replay renders the player at the spawn point") {
  const std::string dir = testutil::fresh_dir("replay_bare");
  write_file(dir + "/lvl.txt", dump_level(testutil::runway(12, 10)));
  write_file(dir + "/noop.replay", "level=" + dir + "/lvl.txt\n0\n");
  CoutCapture cap;
  CHECK(cmd_replay(dir + "/noop.replay", "") == 0);
  const std::string text = cap.str();
  const auto frame_start = text.find('\n', text.find("fitness=")) + 1;
  const std::string frame = text.substr(frame_start);
  // Row above the ground: spawn marker at column 2, flag at column 10.
  CHECK(frame.find("..M.......F.") != std::string::npos);
  CHECK(frame.find("############") != std::string::npos);
}

TEST_CASE("side-by-side comparisons write one summary row per algorithm") {
  const std::string dir = testutil::fresh_dir("compare");
  const std::string ga_out = dir + "/ga_out";
  const std::string ne_out = dir + "/ne_out";
  write_file(dir + "/ga.ini", budgeted_ini("GA", ga_out));
  write_file(dir + "/ne.ini", budgeted_ini("NE", ne_out));

  CoutCapture cap;
  CHECK(cmd_compare(dir + "/ga.ini", dir + "/ne.ini", {"", dir, 0}) == 0);
  REQUIRE(fs::exists(dir + "/compare.csv"));
  const auto lines = split_lines(read_text_file(dir + "/compare.csv"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "algorithm,success_rate,mean_best,mean_generations,wall_seconds");
  CHECK(lines[1].substr(0, 3) == "GA,");
  CHECK(lines[2].substr(0, 3) == "NE,");
  // Zero wall-clock budget: both runs stop after the initial generation.
  for (int row : {1, 2}) {
    std::stringstream ss(lines[static_cast<std::size_t>(row)]);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 5);
    CHECK(fields[3] == "0");
  }
  CHECK(fs::exists(ga_out + "/run_1.csv"));
  CHECK(fs::exists(ne_out + "/run_1.csv"));
  CHECK(cap.str().find("algorithm") != std::string::npos);
}

TEST_CASE("comparisons validate their two configs up front") {
  const std::string dir = testutil::fresh_dir("compare_bad");
  write_file(dir + "/ga.ini", budgeted_ini("GA", dir + "/ga_out"));
  write_file(dir + "/ne.ini", budgeted_ini("NE", dir + "/ne_out"));
  CoutCapture cap;

  // Wrong algorithm on either side.
  CHECK(cmd_compare(dir + "/ne.ini", dir + "/ne.ini", {"", dir, 0}) == 2);
  CHECK(cmd_compare(dir + "/ga.ini", dir + "/ga.ini", {"", dir, 0}) == 2);

  // Same output directory.
  write_file(dir + "/ne_same.ini", budgeted_ini("NE", dir + "/ga_out"));
  CHECK(cmd_compare(dir + "/ga.ini", dir + "/ne_same.ini", {"", dir, 0}) == 2);

  // Disagreeing wall-clock budgets.
  std::string ne_budget = budgeted_ini("NE", dir + "/ne_out2");
  const auto pos = ne_budget.find("wall_clock_budget = 0");
  REQUIRE(pos != std::string::npos);
  ne_budget.replace(pos, 21, "wall_clock_budget = 5");
  write_file(dir + "/ne_budget.ini", ne_budget);
  CHECK(cmd_compare(dir + "/ga.ini", dir + "/ne_budget.ini", {"", dir, 0}) == 2);
}
