#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <array>
#include <set>
#include <vector>

#include "doctest.h"
#include "evoplat/cli.hpp"
#include "evoplat/episode.hpp"
#include "evoplat/errors.hpp"
#include "evoplat/ga.hpp"
#include "evoplat/level.hpp"
#include "evoplat/parallel.hpp"
#include "helpers.hpp"

using namespace evoplat;

namespace {

LevelSpec bundled() {
  return load_level_file(testutil::repo_path("levels/w1l1.txt"));
}

std::vector<Action> random_moves(std::size_t len, Rng& rng) {
  std::vector<Action> m(len);
  for (auto& a : m) a = kAllActions[next_index(rng, kAllActions.size())];
  return m;
}

}  // namespace

TEST_CASE("config validation enforces the documented bounds") {
  GAConfig ok;
  CHECK_NOTHROW(ok.validate());

  auto expect_throw = [](auto&& tweak) {
    GAConfig c;
    tweak(c);
    CHECK_THROWS_AS(c.validate(), ValidationError);
  };
  expect_throw([](GAConfig& c) { c.population_size = 1; });
  expect_throw([](GAConfig& c) { c.generation_amount = -1; });
  expect_throw([](GAConfig& c) { c.moves_amount = 0; });
  expect_throw([](GAConfig& c) { c.moves_to_check = 0; });
  expect_throw([](GAConfig& c) { c.moves_mutable = 0.0; });
  expect_throw([](GAConfig& c) { c.moves_mutable = 1.5; });
  expect_throw([](GAConfig& c) { c.base_mutation_rate = -0.1; });
  expect_throw([](GAConfig& c) { c.mutation_step = 0.0; });
  expect_throw([](GAConfig& c) { c.mutation_rate_max = 0.0; });
  expect_throw([](GAConfig& c) { c.elitism_count = 0; });
  expect_throw([](GAConfig& c) { c.elitism_count = c.population_size; });
  expect_throw([](GAConfig& c) { c.offspring_per_pair = 3; });
  expect_throw([](GAConfig& c) { c.tournament_size = 0; });
  expect_throw([](GAConfig& c) { c.tournament_size = c.population_size + 1; });
  expect_throw([](GAConfig& c) { c.crossover_point_fraction = 0.0; });
  expect_throw([](GAConfig& c) { c.crossover_point_fraction = 1.0; });
  expect_throw([](GAConfig& c) { c.action_set.clear(); });
}

TEST_CASE("population creation is deterministic and honors the alphabet") {
  GAConfig c;
  c.population_size = 10;
  c.moves_amount = 40;
  c.action_set = {Action::Noop, Action::Right, Action::Jump};
  c.rng_seed = 42;
  auto p1 = create_population(c);
  auto p2 = create_population(c);
  REQUIRE(p1.size() == 10);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].moves == p2[i].moves);
    CHECK(p1[i].moves.size() == 40);
    CHECK_FALSE(p1[i].evaluated);
    for (Action a : p1[i].moves) {
      CHECK((a == Action::Noop || a == Action::Right || a == Action::Jump));
    }
  }
  c.rng_seed = 43;
  auto p3 = create_population(c);
  bool any_diff = false;
  for (std::size_t i = 0; i < p1.size(); ++i)
    if (p3[i].moves != p1[i].moves) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("evaluating a scripted winner reports the flag and its fitness") {
  LevelSpec lv = bundled();
  FitnessParams p;
  auto [direct, rep] =
      run_episode(lv, [](const ObservationProvider&) { return Action::RightJumpRun; },
                  600, 100, p);
  REQUIRE(direct.flag_get);

  GAConfig c;
  c.moves_amount = 500;
  c.moves_to_check = 100;
  AgentGenome g = custom_starting_agent(rep.actions, c);
  evaluate_genome(g, lv, c, p);
  CHECK(g.evaluated);
  CHECK(g.summary.flag_get);
  CHECK(g.fitness == compute_fitness(direct, p));
  CHECK(g.moves_used == direct.moves_used);
}

TEST_CASE("tournament of one picks uniformly") {
  std::vector<AgentGenome> pop(5);
  for (std::size_t i = 0; i < pop.size(); ++i)
    pop[i].fitness = static_cast<double>(i);
  Rng rng = make_stream(7, 0xabc);
  std::array<int, 5> counts{};
  const int kDraws = 10000;
  for (int k = 0; k < kDraws; ++k) counts[tournament_select(pop, 1, rng)] += 1;
  for (int c : counts) {
    CHECK(c > 2000 - 250);
    CHECK(c < 2000 + 250);
  }
}

TEST_CASE("full-size tournaments return the argmax, ties to the lowest index") {
  Rng seeder = make_stream(11, 0xdef);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<AgentGenome> pop(8);
    for (auto& g : pop) g.fitness = static_cast<double>(next_index(seeder, 5));
    Rng rng = make_stream(static_cast<std::uint64_t>(trial), 0x123);
    const std::size_t winner = tournament_select(pop, 8, rng);
    std::size_t expect = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
      if (pop[i].fitness > pop[expect].fitness) expect = i;
    CHECK(winner == expect);
  }
}

TEST_CASE("one-point crossover swaps tails at the documented cut") {
  std::vector<Action> a(4, Action::Right);
  std::vector<Action> b(4, Action::Jump);
  auto [c1, c2] = one_point_crossover(a, b, 0.5);
  CHECK(c1 == std::vector<Action>{Action::Right, Action::Right, Action::Jump,
                                  Action::Jump});
  CHECK(c2 == std::vector<Action>{Action::Jump, Action::Jump, Action::Right,
                                  Action::Right});
  // The cut clamps into [1, len-1]: extremes still exchange something.
  auto [lo1, lo2] = one_point_crossover(a, b, 0.0);
  CHECK(lo1.front() == Action::Right);
  CHECK(lo1.back() == Action::Jump);
  auto [hi1, hi2] = one_point_crossover(a, b, 0.99);
  CHECK(hi1.back() == Action::Jump);
  CHECK(hi1.front() == Action::Right);
  CHECK_THROWS_AS(one_point_crossover(a, std::vector<Action>(3, Action::Jump), 0.5),
                  LengthMismatch);
  CHECK_THROWS_AS(one_point_crossover(std::vector<Action>(1, Action::Jump),
                                      std::vector<Action>(1, Action::Jump), 0.5),
                  LengthMismatch);
}

TEST_CASE("crossover conserves genes position by position") {
  Rng rng = make_stream(3, 0x777);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 2 + next_index(rng, 30);
    auto a = random_moves(len, rng);
    auto b = random_moves(len, rng);
    const double fraction = next_double(rng);
    auto [c1, c2] = one_point_crossover(a, b, fraction);
    REQUIRE(c1.size() == len);
    REQUIRE(c2.size() == len);
    for (std::size_t i = 0; i < len; ++i) {
      const bool straight = c1[i] == a[i] && c2[i] == b[i];
      const bool swapped = c1[i] == b[i] && c2[i] == a[i];
      CHECK((straight || swapped));
    }
  }
}

TEST_CASE("mutation at rate zero is the identity") {
  Rng rng = make_stream(5, 0x999);
  for (int trial = 0; trial < 100; ++trial) {
    auto moves = random_moves(50, rng);
    auto before = moves;
    const long long replaced =
        mutate_moves(moves, 0.0, 0.8, {kAllActions.begin(), kAllActions.end()}, rng);
    CHECK(replaced == 0);
    CHECK(moves == before);
  }
}

TEST_CASE("mutation never touches the protected prefix") {
  const std::vector<Action> alphabet{kAllActions.begin(), kAllActions.end()};
  Rng rng = make_stream(9, 0x444);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Action> moves(10, Action::Left);
    const long long replaced = mutate_moves(moves, 1.0, 0.8, alphabet, rng);
    CHECK(replaced == 8);  // indices 2..9 all resampled at rate 1
    CHECK(moves[0] == Action::Left);
    CHECK(moves[1] == Action::Left);
  }
}

TEST_CASE("full-rate mutation over the whole genome resamples uniformly") {
  const std::vector<Action> alphabet{kAllActions.begin(), kAllActions.end()};
  Rng rng = make_stream(13, 0x555);
  long long changed = 0;
  const int kTrials = 2000;
  const std::size_t kLen = 21;
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<Action> moves(kLen, Action::Noop);
    const long long replaced = mutate_moves(moves, 1.0, 1.0, alphabet, rng);
    CHECK(replaced == static_cast<long long>(kLen));
    for (Action a : moves)
      if (a != Action::Noop) ++changed;
  }
  // A uniform redraw from 7 symbols keeps the old one 1/7 of the time.
  const double frac = static_cast<double>(changed) / (kTrials * kLen);
  CHECK(frac > 6.0 / 7.0 - 0.02);
  CHECK(frac < 6.0 / 7.0 + 0.02);
}

TEST_CASE("restricted alphabets constrain mutations") {
  const std::vector<Action> alphabet{Action::Right, Action::Jump};
  Rng rng = make_stream(17, 0x666);
  std::vector<Action> moves(40, Action::Left);
  mutate_moves(moves, 1.0, 1.0, alphabet, rng);
  for (Action a : moves) CHECK((a == Action::Right || a == Action::Jump));
}

TEST_CASE("custom starting agents keep their prefix") {
  GAConfig c;
  c.moves_amount = 30;
  c.rng_seed = 4;
  const std::vector<Action> prefix(12, Action::RightRun);
  AgentGenome g = custom_starting_agent(prefix, c);
  REQUIRE(g.moves.size() == 30);
  for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(g.moves[i] == prefix[i]);
  AgentGenome again = custom_starting_agent(prefix, c);
  CHECK(again.moves == g.moves);  // padding is seed-deterministic

  AgentGenome empty = custom_starting_agent({}, c);
  CHECK(empty.moves.size() == 30);

  const std::vector<Action> full(30, Action::Left);
  CHECK(custom_starting_agent(full, c).moves == full);

  CHECK_THROWS_AS(custom_starting_agent(std::vector<Action>(31, Action::Left), c),
                  ValidationError);
}

TEST_CASE("best fitness never decreases across generations") {
  LevelSpec lv = bundled();
  GAConfig c;
  c.population_size = 20;
  c.generation_amount = 120;
  c.moves_amount = 200;  // too short to ever reach the flag
  c.rng_seed = 3;
  FitnessParams p;
  GAResult r = run_ga(lv, c, p);
  CHECK_FALSE(r.solved);
  CHECK(r.generations_run == 120);
  REQUIRE(r.history.size() == 121);
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    CHECK(r.history[i].best >= r.history[i - 1].best);
    CHECK(r.history[i].stuck_cumulative >= r.history[i - 1].stuck_cumulative);
  }
  for (const auto& row : r.history) {
    CHECK(row.worst <= row.mean);
    CHECK(row.mean <= row.best);
  }
  CHECK(r.history.back().best == r.best.fitness);
  CHECK(r.mutations_performed >= r.mutations_at_best);
  CHECK(r.generation_of_best <= r.generations_run);
}

TEST_CASE("identical seeds reproduce identical runs regardless of threads") {
  LevelSpec lv = bundled();
  GAConfig c;
  c.population_size = 12;
  c.generation_amount = 25;
  c.moves_amount = 120;
  c.rng_seed = 99;
  FitnessParams p;

  GAResult serial, parallel;
  {
    ThreadCapGuard cap(1);
    serial = run_ga(lv, c, p);
  }
  {
    ThreadCapGuard cap(4);
    parallel = run_ga(lv, c, p);
  }
  REQUIRE(serial.history.size() == parallel.history.size());
  for (std::size_t i = 0; i < serial.history.size(); ++i) {
    CHECK(serial.history[i].best == parallel.history[i].best);
    CHECK(serial.history[i].mean == parallel.history[i].mean);
    CHECK(serial.history[i].worst == parallel.history[i].worst);
  }
  CHECK(serial.best.moves == parallel.best.moves);
  CHECK(serial.best.fitness == parallel.best.fitness);
  CHECK(serial.mutations_performed == parallel.mutations_performed);

  GAResult again = run_ga(lv, c, p);
  CHECK(again.best.moves == serial.best.moves);

  c.rng_seed = 100;
  GAResult other = run_ga(lv, c, p);
  CHECK(other.best.moves != serial.best.moves);
}

TEST_CASE("a zero generation budget still reports the initial population") {
  LevelSpec lv = bundled();
  GAConfig c;
  c.generation_amount = 0;
  c.moves_amount = 60;
  FitnessParams p;
  GAResult r = run_ga(lv, c, p);
  CHECK(r.generations_run == 0);
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].generation == 0);
  CHECK_FALSE(r.solved);
  CHECK(r.best.evaluated);
  CHECK(r.best.fitness == r.history[0].best);
}

TEST_CASE("stop hooks cut the run short; generation hooks see every row") {
  LevelSpec lv = bundled();
  GAConfig c;
  c.generation_amount = 50;
  c.moves_amount = 60;
  FitnessParams p;
  GARunHooks hooks;
  int rows = 0;
  hooks.on_generation = [&rows](const GenerationStats&) { ++rows; };
  int polls = 0;
  hooks.should_stop = [&polls]() { return ++polls > 5; };
  GAResult r = run_ga(lv, c, p, {}, hooks);
  CHECK(r.generations_run == 5);
  CHECK(r.history.size() == 6);
  CHECK(rows == 6);
}

TEST_CASE("the engine solves a flat generated level quickly") {
  LevelSpec lv = make_level(60, 3, 2, 7);
  GAConfig c;
  c.population_size = 20;
  c.generation_amount = 200;
  c.moves_amount = 500;
  c.rng_seed = 1;
  FitnessParams p;
  p.max_time = lv.max_time;
  GAResult r = run_ga(lv, c, p);
  CHECK(r.solved);
  CHECK(r.best.summary.flag_get);
  CHECK(r.history.back().solved);

  // The stored replay is the useful prefix and reproduces the best fitness.
  CHECK(static_cast<long long>(r.best_replay.actions.size()) == r.best.moves_used);
  auto [sum, state] = replay_episode(lv, r.best_replay.actions, p);
  CHECK(compute_fitness(sum, p) == r.best.fitness);
  CHECK(state.flag_get);
}
