#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "evoplat/actions.hpp"
#include "evoplat/episode.hpp"
#include "evoplat/fitness.hpp"
#include "evoplat/level.hpp"
#include "evoplat/rng.hpp"
#include "evoplat/stats.hpp"

namespace evoplat {

// One candidate: a fixed-length move sequence plus cached evaluation results.
struct AgentGenome {
  std::vector<Action> moves;
  double fitness = std::numeric_limits<double>::quiet_NaN();
  bool evaluated = false;
  long long moves_used = 0;
  EpisodeSummary summary;
};

struct GAConfig {
  long long population_size = 20;
  long long generation_amount = 1000;
  long long moves_amount = 5000;
  long long moves_to_check = 30;    // running-fitness stagnation window
  double moves_mutable = 0.8;       // trailing fraction of the genome open to mutation
  double base_mutation_rate = 0.01;
  double mutation_step = 0.005;
  double mutation_rate_max = 0.8;
  long long elitism_count = 1;
  long long offspring_per_pair = 2;
  long long tournament_size = 3;
  double crossover_point_fraction = 0.5;
  std::uint64_t rng_seed = 1;
  // Restricting the alphabet shrinks the search space for small levels.
  std::vector<Action> action_set{kAllActions.begin(), kAllActions.end()};

  void validate() const;  // throws ValidationError

  bool operator==(const GAConfig&) const = default;
};

struct GAResult {
  AgentGenome best;
  Replay best_replay;
  std::vector<GenerationStats> history;
  long long generations_run = 0;        // generations of variation applied
  long long stuck_events = 0;
  long long mutations_performed = 0;    // cumulative replaced genes
  long long mutations_at_best = 0;      // cumulative count when best first reached
  long long generation_of_best = 0;
  bool solved = false;
};

struct GARunHooks {
  // Called after each generation is evaluated (including generation 0).
  std::function<void(const GenerationStats&)> on_generation;
  // Return true to stop before the next generation (e.g. wall-clock budget).
  std::function<bool()> should_stop;
  bool record_wall_clock = false;
};

// Mutable state threaded through play_generation calls.
struct GARunState {
  std::vector<AgentGenome> population;
  double mutation_rate = 0.0;
  double best_ever = -std::numeric_limits<double>::infinity();
  long long stagnant_generations = 0;
  long long stuck_events = 0;
  long long mutations_performed = 0;
  long long generation = 0;
};

std::vector<AgentGenome> create_population(const GAConfig& config);

// Deterministic, observation-free playback of the move list.
void evaluate_genome(AgentGenome& genome, const LevelSpec& level,
                     const GAConfig& config, const FitnessParams& params);
void evaluate_population(std::vector<AgentGenome>& population, const LevelSpec& level,
                         const GAConfig& config, const FitnessParams& params);

// Picks `tournament_size` distinct entrants; highest fitness wins, ties to the
// lowest population index.
std::size_t tournament_select(const std::vector<AgentGenome>& population,
                              long long tournament_size, Rng& rng);

// Swaps tails at floor(fraction * length), clamped to [1, length - 1].
std::pair<std::vector<Action>, std::vector<Action>> one_point_crossover(
    const std::vector<Action>& a, const std::vector<Action>& b, double fraction);

// Mutates only indices >= floor(length * (1 - moves_mutable)). Returns the
// number of replaced genes.
long long mutate_moves(std::vector<Action>& moves, double mutation_rate,
                       double moves_mutable, const std::vector<Action>& action_set,
                       Rng& rng);

// One full generational step: elitism, tournament + crossover + mutation,
// evaluation, and mutation-rate adaptation.
void play_generation(GARunState& state, const LevelSpec& level, const GAConfig& config,
                     const FitnessParams& params);

GAResult run_ga(const LevelSpec& level, const GAConfig& config,
                const FitnessParams& params, const ConstraintSpec& constraints = {},
                const GARunHooks& hooks = {});

// Seeds one population slot with a known-good prefix padded with random moves.
AgentGenome custom_starting_agent(const std::vector<Action>& prefix,
                                  const GAConfig& config);

}  // namespace evoplat
