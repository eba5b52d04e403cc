#include "evoplat/ga.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "evoplat/errors.hpp"
#include "evoplat/parallel.hpp"

namespace evoplat {

namespace {

// Stream tags so every random decision has its own derived generator.
constexpr std::uint64_t kInitTag = 0x6761496e69740001ULL;  // population init
constexpr std::uint64_t kPairTag = 0x6761506169720002ULL;  // per-generation pair work

Action random_action(const std::vector<Action>& action_set, Rng& rng) {
  return action_set[next_index(rng, action_set.size())];
}

}  // namespace

void GAConfig::validate() const {
  if (population_size < 2) throw ValidationError("population_size must be >= 2");
  if (generation_amount < 0) throw ValidationError("generation_amount must be >= 0");
  if (moves_amount < 1) throw ValidationError("moves_amount must be >= 1");
  if (moves_to_check < 1) throw ValidationError("moves_to_check must be >= 1");
  if (!(moves_mutable > 0.0 && moves_mutable <= 1.0))
    throw ValidationError("moves_mutable must be in (0, 1]");
  if (!(base_mutation_rate >= 0.0 && base_mutation_rate <= 1.0))
    throw ValidationError("base_mutation_rate must be in [0, 1]");
  if (!(mutation_step > 0.0)) throw ValidationError("mutation_step must be > 0");
  if (!(mutation_rate_max > 0.0 && mutation_rate_max <= 1.0))
    throw ValidationError("mutation_rate_max must be in (0, 1]");
  if (elitism_count < 1 || elitism_count >= population_size)
    throw ValidationError("elitism_count must be in [1, population_size)");
  if (offspring_per_pair < 1 || offspring_per_pair > 2)
    throw ValidationError("offspring_per_pair must be 1 or 2");
  if (tournament_size < 1 || tournament_size > population_size)
    throw ValidationError("tournament_size must be in [1, population_size]");
  if (!(crossover_point_fraction > 0.0 && crossover_point_fraction < 1.0))
    throw ValidationError("crossover_point_fraction must be in (0, 1)");
  if (action_set.empty()) throw ValidationError("action_set must not be empty");
  for (Action a : action_set) {
    if (!valid_action_code(static_cast<int>(a)))
      throw ValidationError("action_set contains an invalid action code");
  }
}

std::vector<AgentGenome> create_population(const GAConfig& config) {
  config.validate();
  Rng rng = make_stream(config.rng_seed, kInitTag);
  std::vector<AgentGenome> population(static_cast<std::size_t>(config.population_size));
  for (auto& genome : population) {
    genome.moves.resize(static_cast<std::size_t>(config.moves_amount));
    for (auto& m : genome.moves) m = random_action(config.action_set, rng);
  }
  return population;
}

void evaluate_genome(AgentGenome& genome, const LevelSpec& level,
                     const GAConfig& config, const FitnessParams& params) {
  std::size_t cursor = 0;
  ActionSource source = [&genome, &cursor](const ObservationProvider&) {
    return genome.moves[cursor++];
  };
  auto [summary, replay] = run_episode(level, source, config.moves_amount,
                                       config.moves_to_check, params);
  (void)replay;
  genome.summary = summary;
  genome.moves_used = summary.moves_used;
  genome.fitness = compute_fitness(summary, params);
  genome.evaluated = true;
}

void evaluate_population(std::vector<AgentGenome>& population, const LevelSpec& level,
                         const GAConfig& config, const FitnessParams& params) {
  parallel_for(population.size(), [&](std::size_t i) {
    if (!population[i].evaluated)
      evaluate_genome(population[i], level, config, params);
  });
}

std::size_t tournament_select(const std::vector<AgentGenome>& population,
                              long long tournament_size, Rng& rng) {
  const std::size_t n = population.size();
  if (n == 0) throw ValidationError("tournament_select on empty population");
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(tournament_size), n);
  // Partial Fisher-Yates over an index pool gives t distinct entrants.
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::size_t best = n;
  for (std::size_t k = 0; k < t; ++k) {
    const std::size_t j = k + next_index(rng, n - k);
    std::swap(pool[k], pool[j]);
    const std::size_t idx = pool[k];
    if (best == n || population[idx].fitness > population[best].fitness ||
        (population[idx].fitness == population[best].fitness && idx < best)) {
      best = idx;
    }
  }
  return best;
}

std::pair<std::vector<Action>, std::vector<Action>> one_point_crossover(
    const std::vector<Action>& a, const std::vector<Action>& b, double fraction) {
  if (a.size() != b.size()) throw LengthMismatch("crossover parents differ in length");
  const std::size_t len = a.size();
  if (len < 2) throw LengthMismatch("crossover needs length >= 2");
  auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(len)));
  cut = std::clamp<std::size_t>(cut, 1, len - 1);
  std::vector<Action> child1(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(cut));
  child1.insert(child1.end(), b.begin() + static_cast<std::ptrdiff_t>(cut), b.end());
  std::vector<Action> child2(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(cut));
  child2.insert(child2.end(), a.begin() + static_cast<std::ptrdiff_t>(cut), a.end());
  return {std::move(child1), std::move(child2)};
}

long long mutate_moves(std::vector<Action>& moves, double mutation_rate,
                       double moves_mutable, const std::vector<Action>& action_set,
                       Rng& rng) {
  const auto len = static_cast<double>(moves.size());
  // Nudge past representation error so e.g. 10 * (1 - 0.8) floors to 2, not 1.
  auto start = static_cast<std::size_t>(std::floor(len * (1.0 - moves_mutable) + 1e-9));
  if (start > moves.size()) start = moves.size();
  long long replaced = 0;
  for (std::size_t i = start; i < moves.size(); ++i) {
    if (next_double(rng) < mutation_rate) {
      moves[i] = random_action(action_set, rng);
      ++replaced;
    }
  }
  return replaced;
}

namespace {

// Indices of the population sorted best-first (fitness desc, index asc).
std::vector<std::size_t> rank_population(const std::vector<AgentGenome>& population) {
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
    return population[lhs].fitness > population[rhs].fitness;
  });
  return order;
}

// Index of the highest-fitness genome, ties to the lowest index.
std::size_t argmax_fitness(const std::vector<AgentGenome>& population) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (population[i].fitness > population[best].fitness) best = i;
  }
  return best;
}

GenerationStats summarize_generation(const std::vector<AgentGenome>& population,
                                     long long generation, long long stuck_events,
                                     const ConstraintSpec& constraints) {
  GenerationStats rec;
  rec.generation = generation;
  rec.stuck_cumulative = stuck_events;
  double best = -std::numeric_limits<double>::infinity();
  double worst = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& g : population) {
    best = std::max(best, g.fitness);
    worst = std::min(worst, g.fitness);
    sum += g.fitness;
  }
  rec.best = best;
  rec.worst = worst;
  rec.mean = sum / static_cast<double>(population.size());
  const auto& top = population[argmax_fitness(population)];
  rec.solved = is_solution(top.summary, constraints);
  return rec;
}

}  // namespace

void play_generation(GARunState& state, const LevelSpec& level, const GAConfig& config,
                     const FitnessParams& params) {
  const auto pop_size = static_cast<std::size_t>(config.population_size);
  const std::vector<std::size_t> order = rank_population(state.population);

  std::vector<AgentGenome> next;
  next.reserve(pop_size);
  for (long long e = 0; e < config.elitism_count; ++e) {
    next.push_back(state.population[order[static_cast<std::size_t>(e)]]);
  }

  state.generation += 1;
  long long pair_index = 0;
  while (next.size() < pop_size) {
    Rng rng = make_stream(config.rng_seed, kPairTag,
                          static_cast<std::uint64_t>(state.generation),
                          static_cast<std::uint64_t>(pair_index));
    ++pair_index;
    const std::size_t pa = tournament_select(state.population, config.tournament_size, rng);
    const std::size_t pb = tournament_select(state.population, config.tournament_size, rng);
    auto [c1, c2] = one_point_crossover(state.population[pa].moves,
                                        state.population[pb].moves,
                                        config.crossover_point_fraction);
    state.mutations_performed += mutate_moves(c1, state.mutation_rate, config.moves_mutable,
                                              config.action_set, rng);
    state.mutations_performed += mutate_moves(c2, state.mutation_rate, config.moves_mutable,
                                              config.action_set, rng);
    AgentGenome g1;
    g1.moves = std::move(c1);
    next.push_back(std::move(g1));
    if (config.offspring_per_pair == 2 && next.size() < pop_size) {
      AgentGenome g2;
      g2.moves = std::move(c2);
      next.push_back(std::move(g2));
    }
  }

  state.population = std::move(next);
  evaluate_population(state.population, level, config, params);

  double gen_best = -std::numeric_limits<double>::infinity();
  for (const auto& g : state.population) gen_best = std::max(gen_best, g.fitness);

  if (gen_best > state.best_ever) {
    state.best_ever = gen_best;
    state.stagnant_generations = 0;
    state.mutation_rate = std::max(state.mutation_rate - config.mutation_step,
                                   config.mutation_step);
  } else {
    state.stuck_events += 1;
    state.stagnant_generations += 1;
    state.mutation_rate = std::min(state.mutation_rate + config.mutation_step,
                                   config.mutation_rate_max);
  }
}

GAResult run_ga(const LevelSpec& level, const GAConfig& config,
                const FitnessParams& params, const ConstraintSpec& constraints,
                const GARunHooks& hooks) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_seconds = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  GARunState state;
  state.population = create_population(config);
  state.mutation_rate = config.base_mutation_rate;
  evaluate_population(state.population, level, config, params);
  for (const auto& g : state.population)
    state.best_ever = std::max(state.best_ever, g.fitness);

  GAResult result;
  auto record_generation = [&]() {
    GenerationStats rec = summarize_generation(state.population, state.generation,
                                               state.stuck_events, constraints);
    if (hooks.record_wall_clock) rec.elapsed_wall = elapsed_seconds();
    result.history.push_back(rec);
    if (hooks.on_generation) hooks.on_generation(rec);
    return rec;
  };

  auto track_best = [&]() {
    for (std::size_t i = 0; i < state.population.size(); ++i) {
      const auto& g = state.population[i];
      if (!result.best.evaluated || g.fitness > result.best.fitness) {
        result.best = g;
        result.mutations_at_best = state.mutations_performed;
        result.generation_of_best = state.generation;
      }
    }
  };

  track_best();
  GenerationStats rec = record_generation();
  result.solved = rec.solved;

  while (!result.solved && state.generation < config.generation_amount) {
    if (hooks.should_stop && hooks.should_stop()) break;
    play_generation(state, level, config, params);
    track_best();
    rec = record_generation();
    result.solved = rec.solved;
  }

  result.generations_run = state.generation;
  result.stuck_events = state.stuck_events;
  result.mutations_performed = state.mutations_performed;
  result.best_replay.actions.assign(
      result.best.moves.begin(),
      result.best.moves.begin() + static_cast<std::ptrdiff_t>(result.best.moves_used));
  return result;
}

AgentGenome custom_starting_agent(const std::vector<Action>& prefix,
                                  const GAConfig& config) {
  config.validate();
  if (static_cast<long long>(prefix.size()) > config.moves_amount)
    throw ValidationError("starting agent prefix longer than moves_amount");
  for (Action a : prefix) {
    if (!valid_action_code(static_cast<int>(a)))
      throw ValidationError("starting agent prefix contains an invalid action");
  }
  Rng rng = make_stream(config.rng_seed, kInitTag, 1);
  AgentGenome genome;
  genome.moves = prefix;
  genome.moves.reserve(static_cast<std::size_t>(config.moves_amount));
  while (genome.moves.size() < static_cast<std::size_t>(config.moves_amount)) {
    genome.moves.push_back(random_action(config.action_set, rng));
  }
  return genome;
}

}  // namespace evoplat
