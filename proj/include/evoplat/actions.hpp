#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace evoplat {

// Composite controller actions with a stable 0..6 wire encoding. Replays,
// genomes, and network outputs all use these codes.
enum class Action : std::uint8_t {
  Noop = 0,
  Right = 1,
  RightJump = 2,
  RightRun = 3,
  RightJumpRun = 4,
  Jump = 5,
  Left = 6,
};

inline constexpr int kActionCount = 7;

inline constexpr std::array<Action, kActionCount> kAllActions = {
    Action::Noop,     Action::Right, Action::RightJump, Action::RightRun,
    Action::RightJumpRun, Action::Jump,  Action::Left,
};

// Horizontal intent in sub-tile units per tick. Walk 2, run 4, left mirrors
// walk. Up/down have no effect in this engine and fold into Noop.
inline constexpr int horizontal_speed(Action a) {
  switch (a) {
    case Action::Right:
    case Action::RightJump:
      return 2;
    case Action::RightRun:
    case Action::RightJumpRun:
      return 4;
    case Action::Left:
      return -2;
    default:
      return 0;
  }
}

inline constexpr bool has_jump(Action a) {
  return a == Action::Jump || a == Action::RightJump || a == Action::RightJumpRun;
}

inline constexpr std::string_view action_name(Action a) {
  switch (a) {
    case Action::Noop: return "NOOP";
    case Action::Right: return "RIGHT";
    case Action::RightJump: return "RIGHT_JUMP";
    case Action::RightRun: return "RIGHT_RUN";
    case Action::RightJumpRun: return "RIGHT_JUMP_RUN";
    case Action::Jump: return "JUMP";
    case Action::Left: return "LEFT";
  }
  return "?";
}

inline constexpr bool valid_action_code(long long code) {
  return code >= 0 && code < kActionCount;
}

}  // namespace evoplat
