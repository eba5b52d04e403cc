#include "evoplat/cli.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <iostream>
#include <numeric>

#include "evoplat/config.hpp"
#include "evoplat/episode.hpp"
#include "evoplat/errors.hpp"
#include "evoplat/experiment.hpp"
#include "evoplat/rng.hpp"
#include "evoplat/util.hpp"

namespace evoplat {

namespace {

constexpr std::uint64_t kLevelTag = 0x6d6b4c76656c0004ULL;

// Sample `count` distinct integers from [lo, hi], ascending.
std::vector<long long> sample_distinct(long long lo, long long hi, long long count,
                                       Rng& rng) {
  std::vector<long long> values(static_cast<std::size_t>(hi - lo + 1));
  std::iota(values.begin(), values.end(), lo);
  for (long long i = 0; i < count; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        next_index(rng, values.size() - static_cast<std::size_t>(i));
    std::swap(values[static_cast<std::size_t>(i)], values[j]);
  }
  values.resize(static_cast<std::size_t>(count));
  std::sort(values.begin(), values.end());
  return values;
}

char tile_glyph(Tile t) {
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

std::string render_frame(const LevelSpec& level, const GameState& state) {
  const int px = state.x_pos / 16;
  const int py = state.y_pos / 16;
  std::string out;
  for (int ty = level.height - 1; ty >= 0; --ty) {
    for (int tx = 0; tx < level.width; ++tx) {
      char c = tile_glyph(level.tile(tx, ty));
      if (c == 'o' &&
          state.coin_taken[static_cast<std::size_t>(ty) * level.width + tx])
        c = '.';
      if (tx == px && ty == py) c = 'M';
      out.push_back(c);
    }
    out.push_back('\n');
  }
  return out;
}

int config_error(const std::string& message) {
  std::cerr << "config error: " << message << '\n';
  return 2;
}

}  // namespace

LevelSpec make_level(long long width, long long coins, long long pipes,
                     std::uint64_t seed) {
  if (width < 10) throw ValidationError("width must be >= 10");
  if (coins < 0 || pipes < 0) throw ValidationError("coins and pipes must be >= 0");

  LevelSpec level;
  level.width = static_cast<int>(width);
  level.height = 8;
  level.max_time = 400;
  level.clock_divisor = 24;
  level.start_x = 2;
  level.start_y = 1;
  level.flag_x = static_cast<int>(width) - 2;
  level.flag_y = 1;
  level.grid.assign(static_cast<std::size_t>(level.width) * level.height, Tile::Empty);
  for (int tx = 0; tx < level.width; ++tx)
    level.grid[static_cast<std::size_t>(tx)] = Tile::Ground;
  level.grid[static_cast<std::size_t>(level.flag_y) * level.width + level.flag_x] =
      Tile::Flag;

  Rng rng = make_stream(seed, kLevelTag);

  if (pipes > 0) {
    // Columns c_1 < ... < c_p in [12, width-8] with gaps >= 6: sample distinct
    // d_i from the shrunken range, then fan back out by 5 per index.
    const long long lo = 12;
    const long long hi = width - 8 - 5 * (pipes - 1);
    if (hi - lo + 1 < pipes)
      throw ValidationError("width " + std::to_string(width) + " cannot fit " +
                            std::to_string(pipes) + " pipes");
    const std::vector<long long> d = sample_distinct(lo, hi, pipes, rng);
    for (long long i = 0; i < pipes; ++i) {
      const long long col = d[static_cast<std::size_t>(i)] + 5 * i;
      level.grid[static_cast<std::size_t>(level.width) + col] = Tile::Pipe;
    }
  }

  if (coins > 0) {
    std::vector<long long> cells;  // encoded ty*width + tx over rows 2 and 3
    for (int ty = 2; ty <= 3; ++ty)
      for (int tx = 4; tx <= level.width - 4; ++tx)
        cells.push_back(static_cast<long long>(ty) * level.width + tx);
    if (static_cast<long long>(cells.size()) < coins)
      throw ValidationError("width " + std::to_string(width) + " cannot fit " +
                            std::to_string(coins) + " coins");
    const std::vector<long long> picks =
        sample_distinct(0, static_cast<long long>(cells.size()) - 1, coins, rng);
    for (long long p : picks)
      level.grid[static_cast<std::size_t>(cells[static_cast<std::size_t>(p)])] =
          Tile::Coin;
  }
  return level;
}

int cmd_train(const CliOptions& options) {
  ExperimentConfig config;
  LevelSpec level;
  try {
    config = load_run_config(options.config_path);
    if (!options.out_dir.empty()) config.output_dir = options.out_dir;
    for (std::uint64_t& s : config.seeds)
      s += static_cast<std::uint64_t>(options.seed_offset);
    if (config.level_path.empty())
      throw ConfigError(options.config_path + ": [run] level is not set");
    if (config.output_dir.empty())
      throw ConfigError("no output directory (set [run] output_dir or pass --out)");
    level = load_level_file(config.level_path);
    bind_level(config, level);
    config.validate();
  } catch (const std::exception& e) {
    return config_error(e.what());
  }

  try {
    auto printer = [](std::uint64_t seed, const GenerationStats& row) {
      std::cout << "seed=" << seed << " generation=" << row.generation
                << " best=" << format_double(row.best)
                << (row.solved ? " solved" : "") << '\n';
    };
    const std::vector<RunRecord> records = run_experiment(config, level, printer);
    emit_outputs(records, config.output_dir, level, config.fitness, config.level_path);
    std::cout << "runs=" << records.size()
              << " success_rate=" << format_double(success_rate(records))
              << " output=" << config.output_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
}

int cmd_replay(const std::string& replay_path, const std::string& level_override) {
  ReplayFile rf;
  LevelSpec level;
  try {
    rf = load_replay_file(replay_path);
    const std::string level_path =
        level_override.empty() ? rf.level_path : level_override;
    if (level_path.empty())
      throw ConfigError(replay_path + ": no level in header and none given");
    level = load_level_file(level_path);
  } catch (const std::exception& e) {
    return config_error(e.what());
  }

  try {
    FitnessParams params;
    params.max_time = level.max_time;
    const auto [summary, state] = replay_episode(level, rf.replay.actions, params);
    const double fitness = compute_fitness(summary, params);

    std::cout << "fitness=" << format_double(fitness)
              << " coins=" << summary.collected_coins
              << " distance=" << summary.distance
              << " time_left=" << summary.time_left << " elapsed=" << summary.elapsed
              << " flag=" << (summary.flag_get ? 1 : 0)
              << " deaths=" << summary.deaths << " moves_used=" << summary.moves_used
              << '\n';
    std::cout << render_frame(level, state);

    int rc = 0;
    auto check = [&](const char* key, const std::string& replayed) {
      const auto it = rf.header.find(key);
      if (it == rf.header.end() || it->second == replayed) return;
      std::cout << "divergence: " << key << " recorded=" << it->second
                << " replayed=" << replayed << '\n';
      rc = 4;
    };
    check("fitness", format_double(fitness));
    check("coins", std::to_string(summary.collected_coins));
    check("distance", std::to_string(summary.distance));
    check("time_left", std::to_string(summary.time_left));
    check("flag", summary.flag_get ? "1" : "0");
    check("deaths", std::to_string(summary.deaths));
    check("moves_used", std::to_string(summary.moves_used));
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
}

int cmd_compare(const std::string& ga_config_path, const std::string& ne_config_path,
                const CliOptions& options) {
  ExperimentConfig ga_config, ne_config;
  LevelSpec level;
  try {
    ga_config = load_run_config(ga_config_path);
    ne_config = load_run_config(ne_config_path);
    if (ga_config.algorithm != AlgorithmKind::GA)
      throw ConfigError(ga_config_path + ": expected algorithm = GA");
    if (ne_config.algorithm != AlgorithmKind::NE)
      throw ConfigError(ne_config_path + ": expected algorithm = NE");
    if (ga_config.level_path != ne_config.level_path)
      throw ConfigError("configs disagree on the level");
    if (ga_config.wall_clock_budget != ne_config.wall_clock_budget)
      throw ConfigError("configs disagree on wall_clock_budget");
    for (ExperimentConfig* config : {&ga_config, &ne_config}) {
      for (std::uint64_t& s : config->seeds)
        s += static_cast<std::uint64_t>(options.seed_offset);
      if (config->output_dir.empty())
        throw ConfigError("both configs need output_dir");
    }
    if (ga_config.output_dir == ne_config.output_dir)
      throw ConfigError("configs must use different output_dir");
    if (ga_config.level_path.empty())
      throw ConfigError("configs name no level");
    level = load_level_file(ga_config.level_path);
    bind_level(ga_config, level);
    bind_level(ne_config, level);
    ga_config.validate();
    ne_config.validate();
  } catch (const std::exception& e) {
    return config_error(e.what());
  }

  try {
    struct Row {
      const char* name;
      double success = 0.0;
      double mean_best = 0.0;
      double mean_generations = 0.0;
      double wall_seconds = 0.0;
    };
    std::vector<Row> rows;
    for (const ExperimentConfig* config : {&ga_config, &ne_config}) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<RunRecord> records = run_experiment(*config, level);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      emit_outputs(records, config->output_dir, level, config->fitness,
                   config->level_path);
      Row row;
      row.name = algorithm_name(config->algorithm);
      row.success = success_rate(records);
      for (const RunRecord& r : records) {
        row.mean_best += r.best_fitness;
        row.mean_generations += static_cast<double>(r.generations_run);
      }
      row.mean_best /= static_cast<double>(records.size());
      row.mean_generations /= static_cast<double>(records.size());
      row.wall_seconds = wall;
      rows.push_back(row);
    }

    std::cout << std::left << std::setw(10) << "algorithm" << std::setw(14)
              << "success_rate" << std::setw(22) << "mean_best" << std::setw(18)
              << "mean_generations" << "wall_seconds" << '\n';
    std::string csv = "algorithm,success_rate,mean_best,mean_generations,wall_seconds\n";
    for (const Row& row : rows) {
      std::cout << std::left << std::setw(10) << row.name << std::setw(14)
                << format_double(row.success) << std::setw(22)
                << format_double(row.mean_best) << std::setw(18)
                << format_double(row.mean_generations)
                << format_fixed(row.wall_seconds, 3) << '\n';
      csv += row.name;
      csv.push_back(',');
      csv += format_double(row.success);
      csv.push_back(',');
      csv += format_double(row.mean_best);
      csv.push_back(',');
      csv += format_double(row.mean_generations);
      csv.push_back(',');
      csv += format_fixed(row.wall_seconds, 3);
      csv.push_back('\n');
    }
    const std::string dir = options.out_dir.empty() ? std::string(".") : options.out_dir;
    write_text_file_atomic(dir + "/compare.csv", csv);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
}

int cmd_make_level(const std::string& out_path, long long width, long long coins,
                   long long pipes, std::uint64_t seed) {
  LevelSpec level;
  try {
    level = make_level(width, coins, pipes, seed);
  } catch (const std::exception& e) {
    return config_error(e.what());
  }
  try {
    write_text_file_atomic(out_path, dump_level(level));
    std::cout << "wrote " << out_path << " (" << level.width << "x" << level.height
              << ", coins=" << coins << ", pipes=" << pipes << ")\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace evoplat
