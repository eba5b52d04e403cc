#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evoplat/actions.hpp"
#include "evoplat/episode.hpp"
#include "evoplat/fitness.hpp"
#include "evoplat/game.hpp"
#include "evoplat/level.hpp"
#include "evoplat/rng.hpp"
#include "evoplat/stats.hpp"

namespace evoplat::neat {

enum class NodeKind : std::uint8_t { Input = 0, Hidden = 1, Output = 2 };
enum class ActivationFn : std::uint8_t { Sigmoid = 0, Gauss = 1 };
enum class AggregationFn : std::uint8_t { Sum = 0 };

const char* activation_name(ActivationFn fn);
const char* aggregation_name(AggregationFn fn);
ActivationFn parse_activation(const std::string& name);    // throws ConfigError
AggregationFn parse_aggregation(const std::string& name);  // throws ConfigError

double apply_activation(ActivationFn fn, double x);

struct NodeGene {
  int id = 0;
  NodeKind kind = NodeKind::Hidden;
  double bias = 0.0;
  double response = 1.0;
  ActivationFn activation = ActivationFn::Sigmoid;
  AggregationFn aggregation = AggregationFn::Sum;

  bool operator==(const NodeGene&) const = default;
};

using ConnKey = std::pair<int, int>;  // (in_node, out_node)

struct ConnectionGene {
  int in_node = 0;
  int out_node = 0;
  double weight = 0.0;
  bool enabled = true;
  long long innovation = 0;

  bool operator==(const ConnectionGene&) const = default;
};

// Node ids: inputs are 0..num_inputs-1, outputs follow, hidden nodes continue
// upward. Input nodes are stored for bookkeeping but are identity pass-throughs.
struct Genome {
  int key = 0;
  std::map<int, NodeGene> nodes;
  std::map<ConnKey, ConnectionGene> connections;
  double fitness = std::numeric_limits<double>::quiet_NaN();
  bool evaluated = false;
  long long moves_used = 0;
  EpisodeSummary summary;
};

// Structural + parametric equality of the gene sets (key/fitness ignored).
bool structurally_equal(const Genome& a, const Genome& b);

struct NEATConfig {
  // [NEAT]
  std::string fitness_criterion = "max";
  double fitness_threshold = 500000.0;
  long long pop_size = 150;
  bool reset_on_extinction = true;
  // [DefaultGenome]
  std::string activation_default = "sigmoid";
  double activation_mutate_rate = 0.05;
  std::vector<std::string> activation_options{"sigmoid", "gauss"};
  std::string aggregation_default = "random";
  double aggregation_mutate_rate = 0.05;
  std::vector<std::string> aggregation_options{"sum"};
  double bias_init_mean = 0.05;
  double bias_init_stdev = 1.0;
  double bias_max_value = 30.0;
  double bias_min_value = -30.0;
  double bias_mutate_power = 0.5;
  double bias_mutate_rate = 0.7;
  double bias_replace_rate = 0.1;
  double compatibility_disjoint_coefficient = 1.0;
  double compatibility_weight_coefficient = 0.5;
  double conn_add_prob = 0.5;
  double conn_delete_prob = 0.5;
  bool enabled_default = true;
  double enabled_mutate_rate = 0.5;
  bool feed_forward = false;
  std::string initial_connection = "partial 0.5";
  double node_add_prob = 0.5;
  double node_delete_prob = 0.2;
  long long num_hidden = 0;
  long long num_inputs = 68;  // bound to the observation length
  long long num_outputs = 7;
  double response_init_mean = 1.0;
  double response_init_stdev = 0.05;
  double response_max_value = 30.0;
  double response_min_value = -30.0;
  double response_mutate_power = 0.1;
  double response_mutate_rate = 0.75;
  double response_replace_rate = 0.1;
  double weight_init_mean = 0.1;
  double weight_init_stdev = 1.0;
  double weight_max_value = 30.0;
  double weight_min_value = -30.0;
  double weight_mutate_power = 0.5;
  double weight_mutate_rate = 0.8;
  double weight_replace_rate = 0.1;
  // [DefaultSpeciesSet]
  double compatibility_threshold = 2.5;
  // [DefaultStagnation]
  std::string species_fitness_func = "max";
  long long max_stagnation = 50;
  long long species_elitism = 2;
  // [DefaultReproduction]
  long long elitism = 3;
  double survival_threshold = 0.3;

  void validate() const;  // throws ValidationError

  bool operator==(const NEATConfig&) const = default;
};

// Run-wide bookkeeping so identical structural events get identical ids.
class InnovationRegistry {
 public:
  explicit InnovationRegistry(int first_free_node_id)
      : next_node_id_(first_free_node_id) {}

  long long connection_innovation(int in_node, int out_node);
  int split_node_id(int in_node, int out_node);
  int peek_next_node_id() const { return next_node_id_; }

 private:
  std::map<ConnKey, long long> conn_innovations_;
  std::map<ConnKey, int> split_nodes_;
  long long next_innovation_ = 0;
  int next_node_id_ = 0;
};

InnovationRegistry make_registry(const NEATConfig& config);

Genome init_genome(const NEATConfig& config, InnovationRegistry& registry, Rng& rng,
                   int key = 0);

// Compiled phenotype. Recurrent mode propagates one step per activate() with
// node values persisting across calls; feed-forward mode evaluates in
// topological order.
class Network {
 public:
  Network(const Genome& genome, const NEATConfig& config);

  void reset();
  // Returns num_outputs scores. Throws DimensionMismatch on bad input length.
  const std::vector<double>& activate(const std::vector<double>& inputs);
  Action choose_action(const std::vector<double>& inputs);

 private:
  struct NodeEval {
    std::size_t slot = 0;
    double bias = 0.0;
    double response = 1.0;
    ActivationFn activation = ActivationFn::Sigmoid;
    std::vector<std::pair<std::size_t, double>> incoming;  // (source slot, weight)
  };

  bool feed_forward_ = false;
  std::size_t num_inputs_ = 0;
  std::vector<std::size_t> output_slots_;
  std::vector<NodeEval> evals_;
  std::vector<double> values_a_;
  std::vector<double> values_b_;
  bool active_a_ = true;
  std::vector<double> outputs_;
};

double compatibility_distance(const Genome& g1, const Genome& g2,
                              const NEATConfig& config);

struct Species {
  int id = 0;
  Genome representative;
  std::vector<int> member_keys;
  double best_fitness_ever = 0.0;
  bool fitness_initialized = false;
  long long generations_since_improvement = 0;
};

struct SpeciesSet {
  std::map<int, Species> species;
  int next_species_id = 1;
};

using Population = std::map<int, Genome>;

// Assigns every genome to a species (first fit against the previous
// representatives, else a new species), drops emptied species, and re-chooses
// each representative as the member closest to the old one.
void speciate(const Population& population, SpeciesSet& species_set,
              const NEATConfig& config);

// Child gene structure follows the fitter parent; matching genes are chosen by
// coin flip. The caller assigns the child key.
Genome crossover(const Genome& parent1, const Genome& parent2, Rng& rng);

void mutate(Genome& genome, const NEATConfig& config, InnovationRegistry& registry,
            Rng& rng);

long long mating_pool_size(long long species_size, double survival_threshold);

// Builds the next generation: stagnation culling (top species_elitism species
// protected), adjusted-fitness quotas summing to pop_size, per-species elites,
// and crossover+mutation over each mating pool. Returns an empty population on
// total extinction.
Population reproduce(SpeciesSet& species_set, const Population& population,
                     const NEATConfig& config, InnovationRegistry& registry,
                     int& next_genome_key, Rng& rng);

// One full episode for a genome; the network is freshly compiled and reset.
std::pair<EpisodeSummary, Replay> play_genome(const Genome& genome,
                                              const LevelSpec& level,
                                              const NEATConfig& config,
                                              const FitnessParams& params,
                                              const ObsConfig& obs,
                                              long long move_budget,
                                              long long stagnation_window);

struct NeatRunOptions {
  long long max_generations = 1000;  // evaluated generations, including the first
  long long move_budget = 0;         // 0 derives a cap from the level timer
  long long stagnation_window = 30;
  std::uint64_t seed = 1;
  ObsConfig obs;
  std::function<void(const GenerationStats&)> on_generation;
  std::function<bool()> should_stop;
  bool record_wall_clock = false;
};

struct NeatResult {
  Genome best;
  Replay best_replay;
  std::vector<GenerationStats> history;
  long long generations_run = 0;  // evaluated generations
  long long episodes_evaluated = 0;
  long long stuck_events = 0;
  long long mutations_performed = 0;
  long long mutations_at_best = 0;
  long long generation_of_best = 0;
  bool solved = false;
};

long long default_move_budget(const LevelSpec& level);

NeatResult run_neat(const LevelSpec& level, const NEATConfig& config,
                    const FitnessParams& params, const ConstraintSpec& constraints = {},
                    const NeatRunOptions& options = {});

}  // namespace evoplat::neat
