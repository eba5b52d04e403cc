#include "evoplat/fitness.hpp"

#include <algorithm>

namespace evoplat {

const char* truncation_reason_name(TruncationReason r) {
  switch (r) {
    case TruncationReason::Flag: return "Flag";
    case TruncationReason::Death: return "Death";
    case TruncationReason::Budget: return "Budget";
    case TruncationReason::Stagnation: return "Stagnation";
  }
  return "?";
}

double compute_fitness(const EpisodeSummary& s, const FitnessParams& p) {
  return p.coin_reward * s.collected_coins + p.distance_reward * s.distance -
         p.time_penalty * (p.max_time - s.time_left);
}

double constraint_violation(const EpisodeSummary& s, const ConstraintSpec& c) {
  double g = 0.0;
  g += std::max(0.0, static_cast<double>(s.moves_used) - static_cast<double>(c.max_moves));
  g += std::max(0.0, static_cast<double>(s.deaths) - static_cast<double>(c.max_deaths));
  g += std::max(0.0, static_cast<double>(s.elapsed) - static_cast<double>(c.max_time));
  g += std::max(0.0, static_cast<double>(c.min_coins) - static_cast<double>(s.collected_coins));
  return g;
}

bool is_solution(const EpisodeSummary& s, const ConstraintSpec& c) {
  return s.flag_get && constraint_violation(s, c) == 0.0;
}

}  // namespace evoplat
