#pragma once

namespace evoplat {

// One row of the per-generation history shared by both engines.
struct GenerationStats {
  long long generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double worst = 0.0;
  long long stuck_cumulative = 0;  // generations so far without a new best
  bool solved = false;
  double elapsed_wall = 0.0;  // seconds since run start, 0 when not recorded
};

}  // namespace evoplat
