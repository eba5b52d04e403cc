#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evoplat/episode.hpp"
#include "evoplat/fitness.hpp"
#include "evoplat/ga.hpp"
#include "evoplat/level.hpp"
#include "evoplat/neat.hpp"
#include "evoplat/stats.hpp"

namespace evoplat {

enum class AlgorithmKind { GA, NE };

const char* algorithm_name(AlgorithmKind kind);

struct ExperimentConfig {
  AlgorithmKind algorithm = AlgorithmKind::GA;
  std::string level_path;
  long long repeats = 5;
  std::vector<std::uint64_t> seeds;  // size == repeats, pairwise distinct
  double wall_clock_budget = -1.0;   // seconds between generations; < 0 = none
  std::string output_dir;
  GAConfig ga;
  neat::NEATConfig ne;
  FitnessParams fitness;
  ConstraintSpec constraints;
  ObsConfig obs;
  long long ne_move_budget = 0;  // 0 derives a cap from the level timer
  long long ne_moves_to_check = 30;
  long long ne_generations = 1000;
  bool record_wall_clock = false;  // off keeps emitted files reproducible

  void validate() const;  // throws ValidationError

  bool operator==(const ExperimentConfig&) const = default;
};

// Everything one seeded fold produced.
struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<GenerationStats> history;
  Replay best_replay;
  double best_fitness = 0.0;
  EpisodeSummary best_summary;
  bool solved = false;
  long long generations_run = 0;  // variation generations past the initial one
  long long mutations_performed = 0;  // cumulative when the best first appeared
  double time_to_best = 0.0;          // seconds, 0 unless wall clock recorded
};

// Best-agent counters recomputed by deterministic re-simulation.
struct GameplayStats {
  long long distance = 0;  // sub-tile units
  long long time_taken = 0;
  long long coins = 0;
  long long deaths = 0;
  long long jumps = 0;
  long long right_moves = 0;
  long long left_moves = 0;
  long long moves_used = 0;
  long long mutations_performed = 0;
  double time_to_best = 0.0;
};

// Progress callback: one call per recorded generation of a fold. Loaded
// (already-finished) folds never report.
using GenerationPrinter =
    std::function<void(std::uint64_t seed, const GenerationStats& row)>;

// One seeded fold, no files touched.
RunRecord run_fold(const ExperimentConfig& config, const LevelSpec& level,
                   std::uint64_t seed, const GenerationPrinter& printer = {});

// All folds in seed order. Folds whose run_<seed>.csv and best_<seed>.replay
// already exist under output_dir are loaded back instead of re-run; fresh
// folds write those two files as soon as they finish (atomically), so an
// interrupted experiment resumes where it stopped.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      const LevelSpec& level,
                                      const GenerationPrinter& printer = {});

struct AggregateRow {
  long long generation = 0;
  double mean_best = 0.0;
  double mean_mean = 0.0;
  double mean_worst = 0.0;
};

// Element-wise means aligned by generation, truncated to the shortest run.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

double success_rate(const std::vector<RunRecord>& records);

// Re-simulates the stored replay; throws ReplayMismatch when the recomputed
// fitness differs from the recorded one.
GameplayStats gameplay_stats(const RunRecord& record, const LevelSpec& level,
                             const FitnessParams& params);

// Writes run_<seed>.csv, best_<seed>.replay, summary.csv, stats.csv, and
// fitness.svg under output_dir. Re-running on the same records is
// byte-identical.
void emit_outputs(const std::vector<RunRecord>& records, const std::string& output_dir,
                  const LevelSpec& level, const FitnessParams& params,
                  const std::string& level_ref);

struct ScalingPoint {
  std::string axis;  // "population" or "moves"
  long long value = 0;
  double seconds = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double population_exponent = 0.0;  // log-log least-squares slope
  double moves_exponent = 0.0;
  double population_doubling_ratio = 0.0;  // geometric mean of adjacent ratios
  double moves_doubling_ratio = 0.0;
};

struct ScalingOptions {
  long long base_population = 20;
  long long base_moves = 250;
  long long generations = 3;
  int repetitions = 3;  // per point; the minimum time is kept
  std::uint64_t seed = 1;
};

// Times fixed-generation runs on a wide internal level at base/2x/4x of each
// axis, single-threaded, with stagnation disabled so work per episode is
// exactly proportional to the move budget.
ScalingResult measure_scaling(AlgorithmKind algorithm,
                              const ScalingOptions& options = {});

}  // namespace evoplat
