#include "evoplat/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "evoplat/errors.hpp"
#include "evoplat/parallel.hpp"
#include "evoplat/util.hpp"

namespace evoplat {

namespace {

constexpr const char* kRunCsvHeader =
    "generation,best,mean,worst,stuck_cumulative,solved,elapsed_wall";
constexpr const char* kSummaryCsvHeader = "generation,mean_best,mean_mean,mean_worst";
constexpr const char* kStatsCsvHeader =
    "seed,distance,time_taken,coins,deaths,jumps,right_moves,left_moves,moves_used,"
    "mutations_performed,time_to_best";

std::string run_csv_path(const std::string& dir, std::uint64_t seed) {
  return dir + "/run_" + std::to_string(seed) + ".csv";
}

std::string replay_path(const std::string& dir, std::uint64_t seed) {
  return dir + "/best_" + std::to_string(seed) + ".replay";
}

std::string serialize_history(const std::vector<GenerationStats>& history) {
  std::string out = kRunCsvHeader;
  out.push_back('\n');
  for (const GenerationStats& row : history) {
    out += std::to_string(row.generation);
    out.push_back(',');
    out += format_double(row.best);
    out.push_back(',');
    out += format_double(row.mean);
    out.push_back(',');
    out += format_double(row.worst);
    out.push_back(',');
    out += std::to_string(row.stuck_cumulative);
    out.push_back(',');
    out += row.solved ? "1" : "0";
    out.push_back(',');
    out += format_double(row.elapsed_wall);
    out.push_back('\n');
  }
  return out;
}

std::vector<GenerationStats> parse_history(const std::string& text,
                                           const std::string& origin) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines.front() != kRunCsvHeader)
    throw ParseError(origin + ": missing run CSV header");
  std::vector<GenerationStats> history;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = split(lines[i], ',');
    if (f.size() != 7)
      throw ParseError(origin + ": expected 7 columns, got " +
                       std::to_string(f.size()));
    GenerationStats row;
    row.generation = parse_int(f[0], "generation");
    row.best = parse_double(f[1], "best");
    row.mean = parse_double(f[2], "mean");
    row.worst = parse_double(f[3], "worst");
    row.stuck_cumulative = parse_int(f[4], "stuck_cumulative");
    row.solved = parse_int(f[5], "solved") != 0;
    row.elapsed_wall = parse_double(f[6], "elapsed_wall");
    history.push_back(row);
  }
  if (history.empty()) throw ParseError(origin + ": no data rows");
  return history;
}

std::string serialize_best_replay(const RunRecord& record,
                                  const std::string& level_ref) {
  ReplayFile rf;
  rf.level_path = level_ref;
  rf.header["seed"] = std::to_string(record.seed);
  rf.header["fitness"] = format_double(record.best_fitness);
  rf.header["coins"] = std::to_string(record.best_summary.collected_coins);
  rf.header["distance"] = std::to_string(record.best_summary.distance);
  rf.header["time_left"] = std::to_string(record.best_summary.time_left);
  rf.header["flag"] = record.best_summary.flag_get ? "1" : "0";
  rf.header["deaths"] = std::to_string(record.best_summary.deaths);
  rf.header["moves_used"] = std::to_string(record.best_summary.moves_used);
  rf.header["mutations"] = std::to_string(record.mutations_performed);
  rf.header["time_to_best"] = format_double(record.time_to_best);
  rf.replay = record.best_replay;
  return dump_replay(rf);
}

RunRecord load_fold(const std::string& dir, std::uint64_t seed, const LevelSpec& level,
                    const FitnessParams& params) {
  RunRecord rec;
  rec.seed = seed;
  const std::string csv_path = run_csv_path(dir, seed);
  rec.history = parse_history(read_text_file(csv_path), csv_path);
  const ReplayFile rf = load_replay_file(replay_path(dir, seed));
  rec.best_replay = rf.replay;
  auto field = [&](const char* key) -> const std::string& {
    auto it = rf.header.find(key);
    if (it == rf.header.end())
      throw ParseError(replay_path(dir, seed) + ": missing header key '" +
                       std::string(key) + "'");
    return it->second;
  };
  if (parse_int(field("seed"), "seed") != static_cast<long long>(seed))
    throw ParseError(replay_path(dir, seed) + ": seed header does not match file name");
  rec.best_fitness = parse_double(field("fitness"), "fitness");
  rec.mutations_performed = parse_int(field("mutations"), "mutations");
  rec.time_to_best = parse_double(field("time_to_best"), "time_to_best");
  rec.solved = rec.history.back().solved;
  rec.generations_run = static_cast<long long>(rec.history.size()) - 1;
  auto [summary, state] = replay_episode(level, rec.best_replay.actions, params);
  (void)state;
  rec.best_summary = summary;
  return rec;
}

}  // namespace

const char* algorithm_name(AlgorithmKind kind) {
  return kind == AlgorithmKind::GA ? "GA" : "NE";
}

void ExperimentConfig::validate() const {
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  if (static_cast<long long>(seeds.size()) != repeats)
    throw ValidationError("seeds list must have exactly `repeats` entries");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (static_cast<long long>(unique.size()) != repeats)
    throw ValidationError("seeds must be pairwise distinct");
  if (ne_move_budget < 0) throw ValidationError("move_budget must be >= 0");
  if (ne_moves_to_check < 1) throw ValidationError("moves_to_check must be >= 1");
  if (ne_generations < 1) throw ValidationError("generations must be >= 1");
  ga.validate();
  ne.validate();
  if (algorithm == AlgorithmKind::NE &&
      ne.num_inputs != static_cast<long long>(obs.length()))
    throw ValidationError("num_inputs " + std::to_string(ne.num_inputs) +
                          " does not match the observation window (" +
                          std::to_string(obs.length()) + " values)");
}

RunRecord run_fold(const ExperimentConfig& config, const LevelSpec& level,
                   std::uint64_t seed, const GenerationPrinter& printer) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_seconds = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::function<bool()> budget_stop;
  if (config.wall_clock_budget >= 0.0) {
    const double budget = config.wall_clock_budget;
    budget_stop = [elapsed_seconds, budget]() { return elapsed_seconds() >= budget; };
  }
  std::function<void(const GenerationStats&)> on_generation;
  if (printer)
    on_generation = [&printer, seed](const GenerationStats& row) { printer(seed, row); };

  RunRecord rec;
  rec.seed = seed;
  if (config.algorithm == AlgorithmKind::GA) {
    GAConfig ga = config.ga;
    ga.rng_seed = seed;
    GARunHooks hooks;
    hooks.on_generation = on_generation;
    hooks.should_stop = budget_stop;
    hooks.record_wall_clock = config.record_wall_clock;
    GAResult result = run_ga(level, ga, config.fitness, config.constraints, hooks);
    rec.history = std::move(result.history);
    rec.best_replay = std::move(result.best_replay);
    rec.best_fitness = result.best.fitness;
    rec.best_summary = result.best.summary;
    rec.solved = result.solved;
    rec.mutations_performed = result.mutations_at_best;
    rec.time_to_best =
        rec.history[static_cast<std::size_t>(result.generation_of_best)].elapsed_wall;
  } else {
    neat::NeatRunOptions options;
    options.max_generations = config.ne_generations;
    options.move_budget = config.ne_move_budget;
    options.stagnation_window = config.ne_moves_to_check;
    options.seed = seed;
    options.obs = config.obs;
    options.on_generation = on_generation;
    options.should_stop = budget_stop;
    options.record_wall_clock = config.record_wall_clock;
    neat::NeatResult result =
        neat::run_neat(level, config.ne, config.fitness, config.constraints, options);
    rec.history = std::move(result.history);
    rec.best_replay = std::move(result.best_replay);
    rec.best_fitness = result.best.fitness;
    rec.best_summary = result.best.summary;
    rec.solved = result.solved;
    rec.mutations_performed = result.mutations_at_best;
    rec.time_to_best =
        rec.history[static_cast<std::size_t>(result.generation_of_best)].elapsed_wall;
  }
  rec.generations_run = static_cast<long long>(rec.history.size()) - 1;
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      const LevelSpec& level,
                                      const GenerationPrinter& printer) {
  config.validate();
  if (config.output_dir.empty())
    throw ValidationError("output_dir must not be empty");
  std::vector<RunRecord> records;
  records.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) {
    const std::string csv = run_csv_path(config.output_dir, seed);
    const std::string rep = replay_path(config.output_dir, seed);
    if (file_exists(csv) && file_exists(rep)) {
      records.push_back(load_fold(config.output_dir, seed, level, config.fitness));
      continue;
    }
    RunRecord rec = run_fold(config, level, seed, printer);
    write_text_file_atomic(csv, serialize_history(rec.history));
    write_text_file_atomic(rep, serialize_best_replay(rec, config.level_path));
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw ValidationError("aggregate needs at least one record");
  std::size_t shortest = records.front().history.size();
  for (const RunRecord& r : records)
    shortest = std::min(shortest, r.history.size());
  std::vector<AggregateRow> rows(shortest);
  const double k = static_cast<double>(records.size());
  for (std::size_t g = 0; g < shortest; ++g) {
    AggregateRow& row = rows[g];
    row.generation = static_cast<long long>(g);
    for (const RunRecord& r : records) {
      row.mean_best += r.history[g].best;
      row.mean_mean += r.history[g].mean;
      row.mean_worst += r.history[g].worst;
    }
    row.mean_best /= k;
    row.mean_mean /= k;
    row.mean_worst /= k;
  }
  return rows;
}

double success_rate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw ValidationError("success_rate needs at least one record");
  long long solved = 0;
  for (const RunRecord& r : records)
    if (r.solved) ++solved;
  return static_cast<double>(solved) / static_cast<double>(records.size());
}

GameplayStats gameplay_stats(const RunRecord& record, const LevelSpec& level,
                             const FitnessParams& params) {
  auto [summary, state] = replay_episode(level, record.best_replay.actions, params);
  (void)state;
  const double refit = compute_fitness(summary, params);
  if (refit != record.best_fitness)
    throw ReplayMismatch("re-simulated fitness " + format_double(refit) +
                         " differs from recorded " +
                         format_double(record.best_fitness));
  GameplayStats stats;
  stats.distance = summary.distance;
  stats.time_taken = summary.elapsed;
  stats.coins = summary.collected_coins;
  stats.deaths = summary.deaths;
  for (Action a : record.best_replay.actions) {
    switch (a) {
      case Action::RightJump:
      case Action::RightJumpRun:
      case Action::Jump:
        ++stats.jumps;
        break;
      case Action::Right:
      case Action::RightRun:
        ++stats.right_moves;
        break;
      case Action::Left:
        ++stats.left_moves;
        break;
      case Action::Noop:
        break;
    }
  }
  stats.moves_used = summary.moves_used;
  stats.mutations_performed = record.mutations_performed;
  stats.time_to_best = record.time_to_best;
  return stats;
}

namespace {

std::string svg_escape_free_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out.push_back(c);
  }
  return out;
}

// Self-contained line chart: one polyline per series, linear axes, 5 ticks.
std::string render_fitness_svg(const std::vector<AggregateRow>& rows) {
  const double w = 800.0, h = 500.0;
  const double ml = 80.0, mr = 24.0, mt = 24.0, mb = 64.0;
  const double plot_w = w - ml - mr;
  const double plot_h = h - mt - mb;

  double xmin = 0.0;
  double xmax = rows.empty() ? 1.0 : static_cast<double>(rows.back().generation);
  if (xmax <= xmin) xmax = xmin + 1.0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const AggregateRow& r : rows) {
    ymin = std::min({ymin, r.mean_best, r.mean_mean, r.mean_worst});
    ymax = std::max({ymax, r.mean_best, r.mean_mean, r.mean_worst});
  }
  if (rows.empty()) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (ymax <= ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double ypad = (ymax - ymin) * 0.05;
  ymin -= ypad;
  ymax += ypad;

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";

  // Axes.
  svg += "<line x1=\"" + format_fixed(ml, 2) + "\" y1=\"" + format_fixed(mt, 2) +
         "\" x2=\"" + format_fixed(ml, 2) + "\" y2=\"" + format_fixed(mt + plot_h, 2) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_fixed(ml, 2) + "\" y1=\"" +
         format_fixed(mt + plot_h, 2) + "\" x2=\"" + format_fixed(ml + plot_w, 2) +
         "\" y2=\"" + format_fixed(mt + plot_h, 2) + "\" stroke=\"black\"/>\n";

  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / ticks;
    const double px = sx(fx);
    svg += "<line x1=\"" + format_fixed(px, 2) + "\" y1=\"" +
           format_fixed(mt + plot_h, 2) + "\" x2=\"" + format_fixed(px, 2) +
           "\" y2=\"" + format_fixed(mt + plot_h + 6, 2) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_fixed(px, 2) + "\" y=\"" +
           format_fixed(mt + plot_h + 22, 2) + "\" text-anchor=\"middle\">" +
           format_fixed(fx, 0) + "</text>\n";
    const double fy = ymin + (ymax - ymin) * t / ticks;
    const double py = sy(fy);
    svg += "<line x1=\"" + format_fixed(ml - 6, 2) + "\" y1=\"" + format_fixed(py, 2) +
           "\" x2=\"" + format_fixed(ml, 2) + "\" y2=\"" + format_fixed(py, 2) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_fixed(ml - 10, 2) + "\" y=\"" +
           format_fixed(py + 4, 2) + "\" text-anchor=\"end\">" + format_fixed(fy, 2) +
           "</text>\n";
  }
  svg += "<text x=\"" + format_fixed(ml + plot_w / 2, 2) + "\" y=\"" +
         format_fixed(h - 14, 2) + "\" text-anchor=\"middle\">generation</text>\n";
  svg += "<text x=\"18\" y=\"" + format_fixed(mt + plot_h / 2, 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         format_fixed(mt + plot_h / 2, 2) + ")\">fitness</text>\n";

  struct SeriesDef {
    const char* label;
    const char* color;
    double AggregateRow::* field;
  };
  const SeriesDef series[3] = {
      {"best", "#1f77b4", &AggregateRow::mean_best},
      {"mean", "#2ca02c", &AggregateRow::mean_mean},
      {"worst", "#d62728", &AggregateRow::mean_worst},
  };
  for (const SeriesDef& s : series) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += s.color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) svg.push_back(' ');
      svg += format_fixed(sx(static_cast<double>(rows[i].generation)), 2);
      svg.push_back(',');
      svg += format_fixed(sy(rows[i].*(s.field)), 2);
    }
    svg += "\"/>\n";
  }

  // Legend, top right.
  double ly = mt + 10.0;
  for (const SeriesDef& s : series) {
    const double lx = ml + plot_w - 130.0;
    svg += "<line x1=\"" + format_fixed(lx, 2) + "\" y1=\"" + format_fixed(ly, 2) +
           "\" x2=\"" + format_fixed(lx + 26, 2) + "\" y2=\"" + format_fixed(ly, 2) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_fixed(lx + 32, 2) + "\" y=\"" +
           format_fixed(ly + 4, 2) + "\">" + svg_escape_free_text(s.label) +
           "</text>\n";
    ly += 18.0;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

void emit_outputs(const std::vector<RunRecord>& records, const std::string& output_dir,
                  const LevelSpec& level, const FitnessParams& params,
                  const std::string& level_ref) {
  if (records.empty()) throw ValidationError("emit_outputs needs at least one record");
  for (const RunRecord& rec : records) {
    write_text_file_atomic(run_csv_path(output_dir, rec.seed),
                           serialize_history(rec.history));
    write_text_file_atomic(replay_path(output_dir, rec.seed),
                           serialize_best_replay(rec, level_ref));
  }

  const std::vector<AggregateRow> rows = aggregate(records);
  std::string summary = kSummaryCsvHeader;
  summary.push_back('\n');
  for (const AggregateRow& row : rows) {
    summary += std::to_string(row.generation);
    summary.push_back(',');
    summary += format_double(row.mean_best);
    summary.push_back(',');
    summary += format_double(row.mean_mean);
    summary.push_back(',');
    summary += format_double(row.mean_worst);
    summary.push_back('\n');
  }
  write_text_file_atomic(output_dir + "/summary.csv", summary);

  std::string stats = kStatsCsvHeader;
  stats.push_back('\n');
  for (const RunRecord& rec : records) {
    const GameplayStats gp = gameplay_stats(rec, level, params);
    stats += std::to_string(rec.seed);
    stats.push_back(',');
    stats += std::to_string(gp.distance);
    stats.push_back(',');
    stats += std::to_string(gp.time_taken);
    stats.push_back(',');
    stats += std::to_string(gp.coins);
    stats.push_back(',');
    stats += std::to_string(gp.deaths);
    stats.push_back(',');
    stats += std::to_string(gp.jumps);
    stats.push_back(',');
    stats += std::to_string(gp.right_moves);
    stats.push_back(',');
    stats += std::to_string(gp.left_moves);
    stats.push_back(',');
    stats += std::to_string(gp.moves_used);
    stats.push_back(',');
    stats += std::to_string(gp.mutations_performed);
    stats.push_back(',');
    stats += format_double(gp.time_to_best);
    stats.push_back('\n');
  }
  write_text_file_atomic(output_dir + "/stats.csv", stats);

  write_text_file_atomic(output_dir + "/fitness.svg", render_fitness_svg(rows));
}

namespace {

// Wide flat runway whose flag is unreachable within any tested move budget,
// so every episode costs exactly its move budget.
LevelSpec make_scaling_level() {
  LevelSpec level;
  level.width = 2048;
  level.height = 4;
  level.max_time = 1'000'000'000;
  level.clock_divisor = 24;
  level.start_x = 2;
  level.start_y = 1;
  level.flag_x = 2046;
  level.flag_y = 1;
  level.grid.assign(static_cast<std::size_t>(level.width) * level.height, Tile::Empty);
  for (int tx = 0; tx < level.width; ++tx)
    level.grid[static_cast<std::size_t>(tx)] = Tile::Ground;
  level.grid[static_cast<std::size_t>(level.flag_y) * level.width + level.flag_x] =
      Tile::Flag;
  return level;
}

double time_point(AlgorithmKind algorithm, const LevelSpec& level, long long population,
                  long long moves, const ScalingOptions& options) {
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < options.repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    if (algorithm == AlgorithmKind::GA) {
      GAConfig ga;
      ga.population_size = population;
      ga.generation_amount = options.generations;
      ga.moves_amount = moves;
      ga.moves_to_check = moves;  // stagnation can never truncate early
      ga.rng_seed = options.seed;
      FitnessParams params;
      params.max_time = level.max_time;
      run_ga(level, ga, params);
    } else {
      neat::NEATConfig ne;
      ne.pop_size = population;
      FitnessParams params;
      params.max_time = level.max_time;
      neat::NeatRunOptions run_options;
      run_options.max_generations = options.generations;
      run_options.move_budget = moves;
      run_options.stagnation_window = moves;
      run_options.seed = options.seed;
      neat::run_neat(level, ne, params, ConstraintSpec{}, run_options);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, seconds);
  }
  return best;
}

// Least-squares slope of log2(time) against log2(parameter).
double fit_exponent(const std::vector<std::pair<long long, double>>& points) {
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [param, seconds] : points) {
    const double x = std::log2(static_cast<double>(param));
    const double y = std::log2(seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double doubling_ratio(const std::vector<std::pair<long long, double>>& points) {
  double product = 1.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    product *= points[i].second / points[i - 1].second;
  return std::pow(product, 1.0 / static_cast<double>(points.size() - 1));
}

}  // namespace

ScalingResult measure_scaling(AlgorithmKind algorithm, const ScalingOptions& options) {
  if (options.base_population < 2 || options.base_moves < 1 ||
      options.generations < 1 || options.repetitions < 1)
    throw ValidationError("scaling options must be positive (population >= 2)");
  ThreadCapGuard single_thread(1);
  const LevelSpec level = make_scaling_level();

  ScalingResult result;
  std::vector<std::pair<long long, double>> pop_points;
  for (long long factor = 1; factor <= 4; factor *= 2) {
    const long long population = options.base_population * factor;
    const double seconds =
        time_point(algorithm, level, population, options.base_moves, options);
    pop_points.emplace_back(population, seconds);
    result.points.push_back({"population", population, seconds});
  }
  std::vector<std::pair<long long, double>> move_points;
  for (long long factor = 1; factor <= 4; factor *= 2) {
    const long long moves = options.base_moves * factor;
    const double seconds =
        time_point(algorithm, level, options.base_population, moves, options);
    move_points.emplace_back(moves, seconds);
    result.points.push_back({"moves", moves, seconds});
  }
  result.population_exponent = fit_exponent(pop_points);
  result.moves_exponent = fit_exponent(move_points);
  result.population_doubling_ratio = doubling_ratio(pop_points);
  result.moves_doubling_ratio = doubling_ratio(move_points);
  return result;
}

}  // namespace evoplat
