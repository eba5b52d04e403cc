#pragma once

#include <string>

#include "evoplat/experiment.hpp"

namespace evoplat {

// Parses INI text (sections [run], [fitness], [constraints], [GA], [NEAT],
// [DefaultGenome], [DefaultSpeciesSet], [DefaultStagnation],
// [DefaultReproduction]) into an experiment config. Strict: an unknown
// section, unknown key, duplicate key, or malformed line throws ConfigError
// naming the offender. Every field keeps its engine default unless a key
// overrides it. `origin` prefixes error messages (usually the file path).
ExperimentConfig parse_run_config(const std::string& text, const std::string& origin);

ExperimentConfig load_run_config(const std::string& path);

// Serializes every effective value; parse_run_config on the result yields an
// equal config. fitness.max_time is intentionally not a key — it always comes
// from the level file (see bind_level).
std::string dump_effective_config(const ExperimentConfig& config);

// Fills level-derived values into the config: fitness.max_time.
void bind_level(ExperimentConfig& config, const LevelSpec& level);

}  // namespace evoplat
