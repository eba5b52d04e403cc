#pragma once

#include <cstdint>
#include <vector>

namespace evoplat {

// Scoring weights. max_time must match the level the episode ran on; the
// config loader fills it in from the level file.
struct FitnessParams {
  double coin_reward = 10.0;
  double distance_reward = 0.1;
  double time_penalty = 0.8;
  int max_time = 400;

  bool operator==(const FitnessParams&) const = default;
};

enum class TruncationReason { Flag, Death, Budget, Stagnation };

const char* truncation_reason_name(TruncationReason r);

// What an episode amounted to. distance is in sub-tile units; time_left and
// elapsed are clock units of the final life.
struct EpisodeSummary {
  int collected_coins = 0;
  int distance = 0;
  int time_left = 0;
  int elapsed = 0;
  bool flag_get = false;
  int deaths = 0;
  int moves_used = 0;
  TruncationReason truncation_reason = TruncationReason::Budget;
  std::vector<int> per_life_elapsed;  // stats only; one entry per life played

  bool operator==(const EpisodeSummary&) const = default;
};

// f = coin_reward*coins + distance_reward*distance - time_penalty*(MT - TL).
double compute_fitness(const EpisodeSummary& summary, const FitnessParams& params);

// Feasibility bounds for the constrained-optimization reading of a run.
struct ConstraintSpec {
  long long max_moves = 1'000'000'000;
  int max_deaths = 3;
  long long max_time = 1'000'000'000;  // clock units of the final life
  int min_coins = 0;

  bool operator==(const ConstraintSpec&) const = default;
};

// Sum of positive excesses over the bounds; 0 iff all constraints hold.
double constraint_violation(const EpisodeSummary& summary, const ConstraintSpec& spec);

// Feasible and actually finished the level.
bool is_solution(const EpisodeSummary& summary, const ConstraintSpec& spec);

}  // namespace evoplat
