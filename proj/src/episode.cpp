#include "evoplat/episode.hpp"

#include <limits>

#include "evoplat/errors.hpp"
#include "evoplat/util.hpp"

namespace evoplat {

namespace {

struct EpisodeTracker {
  const LevelSpec& lv;
  const FitnessParams& params;
  GameState state;
  EpisodeSummary summary;
  double best_running = 0.0;  // fitness of the empty episode
  long long stagnant = 0;

  explicit EpisodeTracker(const LevelSpec& level, const FitnessParams& p)
      : lv(level), params(p), state(reset(level)) {}

  // Applies one action; returns true while the episode may continue.
  // Termination precedence: Flag, Death, Budget, Stagnation.
  bool apply(Action a, long long move_budget, long long stagnation_window) {
    StepEvents ev = step(state, lv, a);
    summary.moves_used += 1;
    if (ev.died) {
      summary.deaths += 1;
      summary.per_life_elapsed.push_back(lv.max_time - ev.died_time_left);
    }

    EpisodeSummary partial;
    partial.collected_coins = state.coins;
    partial.distance = state.max_x_reached - lv.start_x * kSubTile;
    partial.time_left = state.time;
    double f = compute_fitness(partial, params);
    if (f > best_running) {
      best_running = f;
      stagnant = 0;
    } else {
      stagnant += 1;
    }

    if (ev.reached_flag) {
      summary.truncation_reason = TruncationReason::Flag;
      return false;
    }
    if (state.life <= 0) {
      summary.truncation_reason = TruncationReason::Death;
      return false;
    }
    if (summary.moves_used >= move_budget) {
      summary.truncation_reason = TruncationReason::Budget;
      return false;
    }
    if (stagnant >= stagnation_window) {
      summary.truncation_reason = TruncationReason::Stagnation;
      return false;
    }
    return true;
  }

  EpisodeSummary finish() {
    summary.collected_coins = state.coins;
    summary.distance = state.max_x_reached - lv.start_x * kSubTile;
    summary.time_left = state.time;
    summary.elapsed = lv.max_time - state.time;
    summary.flag_get = state.flag_get;
    if (state.life > 0 && !state.flag_get) {
      // deaths already recorded their lives; the ongoing life closes here
      summary.per_life_elapsed.push_back(summary.elapsed);
    } else if (state.flag_get) {
      summary.per_life_elapsed.push_back(summary.elapsed);
    }
    return summary;
  }
};

}  // namespace

std::pair<EpisodeSummary, Replay> run_episode(const LevelSpec& level,
                                              const ActionSource& source,
                                              long long move_budget,
                                              long long stagnation_window,
                                              const FitnessParams& params,
                                              const ObsConfig& obs) {
  if (move_budget < 1) throw ValidationError("move_budget must be >= 1");
  if (stagnation_window < 1) throw ValidationError("stagnation_window must be >= 1");

  EpisodeTracker t(level, params);
  ObservationProvider prov(t.state, level, obs);
  Replay replay;
  replay.actions.reserve(static_cast<size_t>(
      std::min<long long>(move_budget, 1 << 20)));

  while (true) {
    Action a = source(prov);
    prov.invalidate();
    replay.actions.push_back(a);
    if (!t.apply(a, move_budget, stagnation_window)) break;
  }
  return {t.finish(), std::move(replay)};
}

std::pair<EpisodeSummary, GameState> replay_episode(const LevelSpec& level,
                                                    const std::vector<Action>& actions,
                                                    const FitnessParams& params) {
  EpisodeTracker t(level, params);
  constexpr long long kUnbounded = std::numeric_limits<long long>::max();
  bool ended = false;
  for (Action a : actions) {
    if (!t.apply(a, kUnbounded, kUnbounded)) {
      ended = true;
      break;
    }
  }
  if (!ended) t.summary.truncation_reason = TruncationReason::Budget;
  EpisodeSummary s = t.finish();
  return {s, t.state};
}

std::string dump_replay(const ReplayFile& rf) {
  std::string out = "level=" + rf.level_path + "\n";
  for (const auto& [k, v] : rf.header) out += k + "=" + v + "\n";
  for (Action a : rf.replay.actions)
    out += std::to_string(static_cast<int>(a)) + "\n";
  return out;
}

ReplayFile parse_replay(const std::string& text) {
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty replay");
  ReplayFile rf;
  size_t i = 0;
  bool saw_level = false;
  for (; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    size_t eq = line.find('=');
    if (eq == std::string::npos) break;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "level") {
      rf.level_path = value;
      saw_level = true;
    } else {
      rf.header[key] = value;
    }
  }
  if (!saw_level) throw ParseError("replay must start with a level=<path> line");
  for (; i < lines.size(); ++i) {
    std::string t = trim(lines[i]);
    if (t.empty()) continue;
    long long code;
    try {
      code = parse_int(t, "action");
    } catch (const ConfigError&) {
      throw ParseError("bad action line in replay: '" + t + "'");
    }
    if (!valid_action_code(code))
      throw ParseError("action code out of range in replay: " + t);
    rf.replay.actions.push_back(static_cast<Action>(code));
  }
  return rf;
}

ReplayFile load_replay_file(const std::string& path) {
  return parse_replay(read_text_file(path));
}

}  // namespace evoplat
