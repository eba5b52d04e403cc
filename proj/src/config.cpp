#include "evoplat/config.hpp"

#include <set>
#include <utility>

#include "evoplat/errors.hpp"
#include "evoplat/util.hpp"

namespace evoplat {

namespace {

using Cfg = ExperimentConfig;

struct DoubleKey {
  const char* section;
  const char* key;
  double& (*ref)(Cfg&);
};

struct LongKey {
  const char* section;
  const char* key;
  long long& (*ref)(Cfg&);
};

struct IntKey {
  const char* section;
  const char* key;
  int& (*ref)(Cfg&);
};

struct BoolKey {
  const char* section;
  const char* key;
  bool& (*ref)(Cfg&);
};

struct StringKey {
  const char* section;
  const char* key;
  std::string& (*ref)(Cfg&);
};

struct NameListKey {
  const char* section;
  const char* key;
  std::vector<std::string>& (*ref)(Cfg&);
};

const DoubleKey kDoubleKeys[] = {
    {"run", "wall_clock_budget", [](Cfg& c) -> double& { return c.wall_clock_budget; }},
    {"fitness", "coin_reward", [](Cfg& c) -> double& { return c.fitness.coin_reward; }},
    {"fitness", "distance_reward",
     [](Cfg& c) -> double& { return c.fitness.distance_reward; }},
    {"fitness", "time_penalty", [](Cfg& c) -> double& { return c.fitness.time_penalty; }},
    {"GA", "moves_mutable", [](Cfg& c) -> double& { return c.ga.moves_mutable; }},
    {"GA", "base_mutation_rate",
     [](Cfg& c) -> double& { return c.ga.base_mutation_rate; }},
    {"GA", "mutation_step", [](Cfg& c) -> double& { return c.ga.mutation_step; }},
    {"GA", "mutation_rate_max", [](Cfg& c) -> double& { return c.ga.mutation_rate_max; }},
    {"GA", "crossover_point_fraction",
     [](Cfg& c) -> double& { return c.ga.crossover_point_fraction; }},
    {"NEAT", "fitness_threshold",
     [](Cfg& c) -> double& { return c.ne.fitness_threshold; }},
    {"DefaultGenome", "activation_mutate_rate",
     [](Cfg& c) -> double& { return c.ne.activation_mutate_rate; }},
    {"DefaultGenome", "aggregation_mutate_rate",
     [](Cfg& c) -> double& { return c.ne.aggregation_mutate_rate; }},
    {"DefaultGenome", "bias_init_mean",
     [](Cfg& c) -> double& { return c.ne.bias_init_mean; }},
    {"DefaultGenome", "bias_init_stdev",
     [](Cfg& c) -> double& { return c.ne.bias_init_stdev; }},
    {"DefaultGenome", "bias_max_value",
     [](Cfg& c) -> double& { return c.ne.bias_max_value; }},
    {"DefaultGenome", "bias_min_value",
     [](Cfg& c) -> double& { return c.ne.bias_min_value; }},
    {"DefaultGenome", "bias_mutate_power",
     [](Cfg& c) -> double& { return c.ne.bias_mutate_power; }},
    {"DefaultGenome", "bias_mutate_rate",
     [](Cfg& c) -> double& { return c.ne.bias_mutate_rate; }},
    {"DefaultGenome", "bias_replace_rate",
     [](Cfg& c) -> double& { return c.ne.bias_replace_rate; }},
    {"DefaultGenome", "compatibility_disjoint_coefficient",
     [](Cfg& c) -> double& { return c.ne.compatibility_disjoint_coefficient; }},
    {"DefaultGenome", "compatibility_weight_coefficient",
     [](Cfg& c) -> double& { return c.ne.compatibility_weight_coefficient; }},
    {"DefaultGenome", "conn_add_prob",
     [](Cfg& c) -> double& { return c.ne.conn_add_prob; }},
    {"DefaultGenome", "conn_delete_prob",
     [](Cfg& c) -> double& { return c.ne.conn_delete_prob; }},
    {"DefaultGenome", "enabled_mutate_rate",
     [](Cfg& c) -> double& { return c.ne.enabled_mutate_rate; }},
    {"DefaultGenome", "node_add_prob",
     [](Cfg& c) -> double& { return c.ne.node_add_prob; }},
    {"DefaultGenome", "node_delete_prob",
     [](Cfg& c) -> double& { return c.ne.node_delete_prob; }},
    {"DefaultGenome", "response_init_mean",
     [](Cfg& c) -> double& { return c.ne.response_init_mean; }},
    {"DefaultGenome", "response_init_stdev",
     [](Cfg& c) -> double& { return c.ne.response_init_stdev; }},
    {"DefaultGenome", "response_max_value",
     [](Cfg& c) -> double& { return c.ne.response_max_value; }},
    {"DefaultGenome", "response_min_value",
     [](Cfg& c) -> double& { return c.ne.response_min_value; }},
    {"DefaultGenome", "response_mutate_power",
     [](Cfg& c) -> double& { return c.ne.response_mutate_power; }},
    {"DefaultGenome", "response_mutate_rate",
     [](Cfg& c) -> double& { return c.ne.response_mutate_rate; }},
    {"DefaultGenome", "response_replace_rate",
     [](Cfg& c) -> double& { return c.ne.response_replace_rate; }},
    {"DefaultGenome", "weight_init_mean",
     [](Cfg& c) -> double& { return c.ne.weight_init_mean; }},
    {"DefaultGenome", "weight_init_stdev",
     [](Cfg& c) -> double& { return c.ne.weight_init_stdev; }},
    {"DefaultGenome", "weight_max_value",
     [](Cfg& c) -> double& { return c.ne.weight_max_value; }},
    {"DefaultGenome", "weight_min_value",
     [](Cfg& c) -> double& { return c.ne.weight_min_value; }},
    {"DefaultGenome", "weight_mutate_power",
     [](Cfg& c) -> double& { return c.ne.weight_mutate_power; }},
    {"DefaultGenome", "weight_mutate_rate",
     [](Cfg& c) -> double& { return c.ne.weight_mutate_rate; }},
    {"DefaultGenome", "weight_replace_rate",
     [](Cfg& c) -> double& { return c.ne.weight_replace_rate; }},
    {"DefaultSpeciesSet", "compatibility_threshold",
     [](Cfg& c) -> double& { return c.ne.compatibility_threshold; }},
    {"DefaultReproduction", "survival_threshold",
     [](Cfg& c) -> double& { return c.ne.survival_threshold; }},
};

const LongKey kLongKeys[] = {
    {"run", "repeats", [](Cfg& c) -> long long& { return c.repeats; }},
    {"run", "move_budget", [](Cfg& c) -> long long& { return c.ne_move_budget; }},
    {"run", "moves_to_check",
     [](Cfg& c) -> long long& { return c.ne_moves_to_check; }},
    {"run", "generations", [](Cfg& c) -> long long& { return c.ne_generations; }},
    {"constraints", "max_moves",
     [](Cfg& c) -> long long& { return c.constraints.max_moves; }},
    {"constraints", "max_time",
     [](Cfg& c) -> long long& { return c.constraints.max_time; }},
    {"GA", "population_size",
     [](Cfg& c) -> long long& { return c.ga.population_size; }},
    {"GA", "generation_amount",
     [](Cfg& c) -> long long& { return c.ga.generation_amount; }},
    {"GA", "moves_amount", [](Cfg& c) -> long long& { return c.ga.moves_amount; }},
    {"GA", "moves_to_check", [](Cfg& c) -> long long& { return c.ga.moves_to_check; }},
    {"GA", "elitism_count", [](Cfg& c) -> long long& { return c.ga.elitism_count; }},
    {"GA", "offspring_per_pair",
     [](Cfg& c) -> long long& { return c.ga.offspring_per_pair; }},
    {"GA", "tournament_size", [](Cfg& c) -> long long& { return c.ga.tournament_size; }},
    {"NEAT", "pop_size", [](Cfg& c) -> long long& { return c.ne.pop_size; }},
    {"DefaultGenome", "num_hidden",
     [](Cfg& c) -> long long& { return c.ne.num_hidden; }},
    {"DefaultGenome", "num_inputs",
     [](Cfg& c) -> long long& { return c.ne.num_inputs; }},
    {"DefaultGenome", "num_outputs",
     [](Cfg& c) -> long long& { return c.ne.num_outputs; }},
    {"DefaultStagnation", "max_stagnation",
     [](Cfg& c) -> long long& { return c.ne.max_stagnation; }},
    {"DefaultStagnation", "species_elitism",
     [](Cfg& c) -> long long& { return c.ne.species_elitism; }},
    {"DefaultReproduction", "elitism",
     [](Cfg& c) -> long long& { return c.ne.elitism; }},
};

const IntKey kIntKeys[] = {
    {"run", "obs_window_w", [](Cfg& c) -> int& { return c.obs.width; }},
    {"run", "obs_window_h", [](Cfg& c) -> int& { return c.obs.height; }},
    {"constraints", "max_deaths",
     [](Cfg& c) -> int& { return c.constraints.max_deaths; }},
    {"constraints", "min_coins", [](Cfg& c) -> int& { return c.constraints.min_coins; }},
};

const BoolKey kBoolKeys[] = {
    {"run", "record_wall_clock", [](Cfg& c) -> bool& { return c.record_wall_clock; }},
    {"NEAT", "reset_on_extinction",
     [](Cfg& c) -> bool& { return c.ne.reset_on_extinction; }},
    {"DefaultGenome", "enabled_default",
     [](Cfg& c) -> bool& { return c.ne.enabled_default; }},
    {"DefaultGenome", "feed_forward", [](Cfg& c) -> bool& { return c.ne.feed_forward; }},
};

const StringKey kStringKeys[] = {
    {"run", "level", [](Cfg& c) -> std::string& { return c.level_path; }},
    {"run", "output_dir", [](Cfg& c) -> std::string& { return c.output_dir; }},
    {"NEAT", "fitness_criterion",
     [](Cfg& c) -> std::string& { return c.ne.fitness_criterion; }},
    {"DefaultGenome", "activation_default",
     [](Cfg& c) -> std::string& { return c.ne.activation_default; }},
    {"DefaultGenome", "aggregation_default",
     [](Cfg& c) -> std::string& { return c.ne.aggregation_default; }},
    {"DefaultGenome", "initial_connection",
     [](Cfg& c) -> std::string& { return c.ne.initial_connection; }},
    {"DefaultStagnation", "species_fitness_func",
     [](Cfg& c) -> std::string& { return c.ne.species_fitness_func; }},
};

const NameListKey kNameListKeys[] = {
    {"DefaultGenome", "activation_options",
     [](Cfg& c) -> std::vector<std::string>& { return c.ne.activation_options; }},
    {"DefaultGenome", "aggregation_options",
     [](Cfg& c) -> std::vector<std::string>& { return c.ne.aggregation_options; }},
};

const char* const kSections[] = {
    "run",  "fitness",           "constraints",       "GA",
    "NEAT", "DefaultGenome",     "DefaultSpeciesSet", "DefaultStagnation",
    "DefaultReproduction",
};

bool known_section(const std::string& name) {
  for (const char* s : kSections)
    if (name == s) return true;
  return false;
}

// Splits on any run of spaces, tabs, or commas.
std::vector<std::string> tokenize_list(const std::string& value) {
  std::string normalized = value;
  for (char& c : normalized)
    if (c == ',' || c == '\t') c = ' ';
  std::vector<std::string> tokens;
  for (const std::string& t : split(normalized, ' '))
    if (!t.empty()) tokens.push_back(t);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

struct ParseTracking {
  bool repeats_given = false;
  bool seeds_given = false;
};

void apply_key(Cfg& config, const std::string& section, const std::string& key,
               const std::string& value, const std::string& origin,
               ParseTracking& tracking) {
  const std::string what = origin + ": [" + section + "] " + key;

  if (section == "run" && key == "algorithm") {
    if (value == "GA")
      config.algorithm = AlgorithmKind::GA;
    else if (value == "NE")
      config.algorithm = AlgorithmKind::NE;
    else
      throw ConfigError(what + ": expected GA or NE, got '" + value + "'");
    return;
  }
  if (section == "run" && key == "seeds") {
    config.seeds.clear();
    for (const std::string& t : tokenize_list(value))
      config.seeds.push_back(static_cast<std::uint64_t>(parse_int(t, what)));
    if (config.seeds.empty()) throw ConfigError(what + ": empty seed list");
    tracking.seeds_given = true;
    return;
  }
  if (section == "GA" && key == "rng_seed") {
    config.ga.rng_seed = static_cast<std::uint64_t>(parse_int(value, what));
    return;
  }
  if (section == "GA" && key == "action_set") {
    config.ga.action_set.clear();
    for (const std::string& t : tokenize_list(value)) {
      const long long code = parse_int(t, what);
      if (!valid_action_code(static_cast<int>(code)))
        throw ConfigError(what + ": invalid action code '" + t + "'");
      config.ga.action_set.push_back(static_cast<Action>(code));
    }
    if (config.ga.action_set.empty()) throw ConfigError(what + ": empty action set");
    return;
  }

  for (const DoubleKey& k : kDoubleKeys) {
    if (section == k.section && key == k.key) {
      k.ref(config) = parse_double(value, what);
      return;
    }
  }
  for (const LongKey& k : kLongKeys) {
    if (section == k.section && key == k.key) {
      k.ref(config) = parse_int(value, what);
      if (section == "run" && key == "repeats") tracking.repeats_given = true;
      return;
    }
  }
  for (const IntKey& k : kIntKeys) {
    if (section == k.section && key == k.key) {
      k.ref(config) = static_cast<int>(parse_int(value, what));
      return;
    }
  }
  for (const BoolKey& k : kBoolKeys) {
    if (section == k.section && key == k.key) {
      k.ref(config) = parse_bool(value, what);
      return;
    }
  }
  for (const StringKey& k : kStringKeys) {
    if (section == k.section && key == k.key) {
      k.ref(config) = value;
      return;
    }
  }
  for (const NameListKey& k : kNameListKeys) {
    if (section == k.section && key == k.key) {
      k.ref(config) = tokenize_list(value);
      if (k.ref(config).empty()) throw ConfigError(what + ": empty list");
      return;
    }
  }
  throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
}

}  // namespace

ExperimentConfig parse_run_config(const std::string& text, const std::string& origin) {
  ExperimentConfig config;
  ParseTracking tracking;
  std::string section;
  std::set<std::pair<std::string, std::string>> seen;

  for (const std::string& raw : split_lines(text)) {
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ": malformed section line '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section))
        throw ConfigError(origin + ": unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ": missing key before '=' in '" + line + "'");
    if (section.empty())
      throw ConfigError(origin + ": key '" + key + "' appears before any section");
    if (!seen.insert({section, key}).second)
      throw ConfigError(origin + ": duplicate key '" + key + "' in [" + section + "]");
    apply_key(config, section, key, value, origin, tracking);
  }

  if (!tracking.seeds_given) {
    config.seeds.clear();
    for (long long i = 1; i <= config.repeats; ++i)
      config.seeds.push_back(static_cast<std::uint64_t>(i));
  } else if (!tracking.repeats_given) {
    config.repeats = static_cast<long long>(config.seeds.size());
  }
  return config;
}

ExperimentConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path), path);
}

std::string dump_effective_config(const ExperimentConfig& config) {
  Cfg& c = const_cast<Cfg&>(config);  // accessor table is non-const; reads only
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out.push_back('\n');
  };
  auto emit_section = [&](const char* name) {
    if (!out.empty()) out.push_back('\n');
    out.push_back('[');
    out += name;
    out += "]\n";
    if (std::string(name) == "run") {
      line("algorithm", algorithm_name(config.algorithm));
      std::vector<std::string> seed_tokens;
      for (std::uint64_t s : config.seeds) seed_tokens.push_back(std::to_string(s));
      for (const StringKey& k : kStringKeys)
        if (std::string(k.section) == name) line(k.key, k.ref(c));
      for (const LongKey& k : kLongKeys)
        if (std::string(k.section) == name) line(k.key, std::to_string(k.ref(c)));
      line("seeds", join_tokens(seed_tokens));
      for (const IntKey& k : kIntKeys)
        if (std::string(k.section) == name) line(k.key, std::to_string(k.ref(c)));
      for (const DoubleKey& k : kDoubleKeys)
        if (std::string(k.section) == name) line(k.key, format_double(k.ref(c)));
      for (const BoolKey& k : kBoolKeys)
        if (std::string(k.section) == name) line(k.key, k.ref(c) ? "true" : "false");
      return;
    }
    for (const StringKey& k : kStringKeys)
      if (std::string(k.section) == name) line(k.key, k.ref(c));
    for (const LongKey& k : kLongKeys)
      if (std::string(k.section) == name) line(k.key, std::to_string(k.ref(c)));
    for (const IntKey& k : kIntKeys)
      if (std::string(k.section) == name) line(k.key, std::to_string(k.ref(c)));
    for (const DoubleKey& k : kDoubleKeys)
      if (std::string(k.section) == name) line(k.key, format_double(k.ref(c)));
    for (const BoolKey& k : kBoolKeys)
      if (std::string(k.section) == name) line(k.key, k.ref(c) ? "true" : "false");
    for (const NameListKey& k : kNameListKeys)
      if (std::string(k.section) == name) line(k.key, join_tokens(k.ref(c)));
    if (std::string(name) == "GA") {
      line("rng_seed", std::to_string(config.ga.rng_seed));
      std::vector<std::string> codes;
      for (Action a : config.ga.action_set)
        codes.push_back(std::to_string(static_cast<int>(a)));
      line("action_set", join_tokens(codes));
    }
  };
  for (const char* name : kSections) emit_section(name);
  return out;
}

void bind_level(ExperimentConfig& config, const LevelSpec& level) {
  config.fitness.max_time = level.max_time;
}

}  // namespace evoplat
