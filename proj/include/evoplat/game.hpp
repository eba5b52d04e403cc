#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "evoplat/actions.hpp"
#include "evoplat/level.hpp"

namespace evoplat {

// Physics constants, sub-tile units (16 per tile).
inline constexpr int kSubTile = 16;
inline constexpr int kWalkSpeed = 2;
inline constexpr int kRunSpeed = 4;
inline constexpr int kGravity = 1;        // per tick^2, downward
inline constexpr int kJumpImpulse = 10;   // set on take-off; no held-jump boost
inline constexpr int kTerminalFall = 8;   // |y_vel| cap while falling

struct GameState {
  int coins = 0;
  bool flag_get = false;
  int life = 3;
  int score = 0;  // 100 per coin
  int stage = 1;
  int time = 0;  // clock units remaining this life
  int world = 1;
  int x_pos = 0;  // sub-tile units, left edge of level = 0
  int y_pos = 0;  // sub-tile units from the bottom
  int x_vel = 0;  // realized displacement last tick (0 when blocked)
  int y_vel = 0;
  int max_x_reached = 0;     // never decreases, survives respawn
  int ticks_this_life = 0;   // physics ticks since (re)spawn; drives the clock
  std::vector<std::uint8_t> coin_taken;  // per-episode mask, grid-indexed

  static constexpr std::string_view status() { return "small"; }

  bool operator==(const GameState&) const = default;
};

struct StepEvents {
  bool coin_collected = false;
  bool died = false;
  bool reached_flag = false;
  bool blocked = false;
  int died_time_left = -1;  // clock units left when the life ended, else -1
};

// Fresh episode state: full timer, 3 lives, zero velocity, agent at start.
// Calling twice yields bit-identical states.
GameState reset(const LevelSpec& level);

// Advances one tick. Order: ground check, vertical intent (jump only from
// the ground), horizontal move with wall blocking, vertical move with
// landing/ceiling snap, cell effects (flag column > hazard > coin), clock,
// death handling with respawn. Throws EpisodeOver after flag_get or when no
// lives remain. reached_flag and died are mutually exclusive.
StepEvents step(GameState& state, const LevelSpec& level, Action action);

// Value-semantics wrapper around step().
std::pair<GameState, StepEvents> step_copy(const GameState& state, const LevelSpec& level,
                                           Action action);

bool on_ground(const GameState& state, const LevelSpec& level);

// Window geometry for observations.
struct ObsConfig {
  int width = 8;
  int height = 8;
  int length() const { return width * height + 4; }

  bool operator==(const ObsConfig&) const = default;
};

// Flattened W*H tile window centered on the agent (top row first, codes as in
// Tile; out-of-level cells and collected coins read Hazard/Empty), followed by
// [x_vel, y_vel, time/max_time, on_ground].
using Observation = std::vector<double>;

Observation observe(const GameState& state, const LevelSpec& level, const ObsConfig& cfg);
void observe_into(const GameState& state, const LevelSpec& level, const ObsConfig& cfg,
                  Observation& out);

}  // namespace evoplat
