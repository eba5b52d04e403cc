#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evoplat/fitness.hpp"
#include "evoplat/game.hpp"

namespace evoplat {

// Executed action trace of one episode.
struct Replay {
  std::vector<Action> actions;

  bool operator==(const Replay&) const = default;
};

// Hands the current observation to an action source without computing it
// unless asked: sequence-driven agents never pay for it, network agents get a
// reused buffer. Valid only during the callback.
class ObservationProvider {
 public:
  ObservationProvider(const GameState& state, const LevelSpec& level, const ObsConfig& cfg)
      : state_(&state), level_(&level), cfg_(cfg) {}

  const Observation& vec() const {
    if (!fresh_) {
      observe_into(*state_, *level_, cfg_, buf_);
      fresh_ = true;
    }
    return buf_;
  }
  const GameState& state() const { return *state_; }
  const ObsConfig& config() const { return cfg_; }

  void invalidate() { fresh_ = false; }

 private:
  const GameState* state_;
  const LevelSpec* level_;
  ObsConfig cfg_;
  mutable Observation buf_;
  mutable bool fresh_ = false;
};

using ActionSource = std::function<Action(const ObservationProvider&)>;

// Drives one episode. Stops on: flag, lives exhausted, move budget, or when
// the running fitness (compute_fitness on the partial episode after each
// move) has not exceeded its previous best for stagnation_window consecutive
// moves — in that precedence. params.max_time should equal level.max_time.
std::pair<EpisodeSummary, Replay> run_episode(const LevelSpec& level,
                                              const ActionSource& source,
                                              long long move_budget,
                                              long long stagnation_window,
                                              const FitnessParams& params,
                                              const ObsConfig& obs = {});

// Feeds a fixed trace with no stagnation cutoff; used by replay verification.
// Actions beyond the episode's natural end are ignored.
std::pair<EpisodeSummary, GameState> replay_episode(const LevelSpec& level,
                                                    const std::vector<Action>& actions,
                                                    const FitnessParams& params);

// Replay file: `level=<path>` first, more `key=value` header lines as needed,
// then one action code (0..6) per line.
struct ReplayFile {
  std::string level_path;
  std::map<std::string, std::string> header;  // excluding "level"
  Replay replay;
};

std::string dump_replay(const ReplayFile& rf);
ReplayFile parse_replay(const std::string& text);
ReplayFile load_replay_file(const std::string& path);

}  // namespace evoplat
