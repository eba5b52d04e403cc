#pragma once

#include <stdexcept>
#include <string>

namespace evoplat {

// Level / replay text that cannot be read at all.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a semantic rule (dimensions, flag count, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or unknown configuration keys/values. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// step() called after flag_get or with no lives left.
struct EpisodeOver : std::logic_error {
  using std::logic_error::logic_error;
};

// Crossover on genomes of different length.
struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Activation input vector does not match num_inputs.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Replay re-simulation disagrees with the recorded summary.
struct ReplayMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace evoplat
