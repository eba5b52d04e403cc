#pragma once

#include <cstdint>
#include <string>

#include "evoplat/level.hpp"

namespace evoplat {

// Deterministic flat test level: height 8, full ground row, start at (2,1),
// flag at (width-2,1), `pipes` one-tile pipe obstacles at seeded columns
// (>= 12, at least 6 tiles apart), `coins` at seeded cells two or three tiles
// up. Throws ValidationError when the request cannot fit the width.
LevelSpec make_level(long long width, long long coins, long long pipes,
                     std::uint64_t seed);

struct CliOptions {
  std::string config_path;
  std::string out_dir;        // overrides [run] output_dir when non-empty
  long long seed_offset = 0;  // added to every seed
};

// Exit codes: 0 success, 2 config/input error, 3 runtime error, 4 divergence.
int cmd_train(const CliOptions& options);
int cmd_replay(const std::string& replay_path, const std::string& level_override);
int cmd_compare(const std::string& ga_config_path, const std::string& ne_config_path,
                const CliOptions& options);
int cmd_make_level(const std::string& out_path, long long width, long long coins,
                   long long pipes, std::uint64_t seed);

}  // namespace evoplat
