#include "evoplat/neat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "evoplat/errors.hpp"
#include "evoplat/parallel.hpp"
#include "evoplat/util.hpp"

namespace evoplat::neat {

namespace {

constexpr std::uint64_t kInitTag = 0x6e65496e69740001ULL;   // initial population
constexpr std::uint64_t kReproTag = 0x6e65526570720002ULL;  // per-generation variation
constexpr std::uint64_t kResetTag = 0x6e65527365740003ULL;  // post-extinction restart

double clamp_value(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

}  // namespace

const char* activation_name(ActivationFn fn) {
  switch (fn) {
    case ActivationFn::Sigmoid: return "sigmoid";
    case ActivationFn::Gauss: return "gauss";
  }
  return "sigmoid";
}

const char* aggregation_name(AggregationFn fn) {
  (void)fn;
  return "sum";
}

ActivationFn parse_activation(const std::string& name) {
  if (name == "sigmoid") return ActivationFn::Sigmoid;
  if (name == "gauss") return ActivationFn::Gauss;
  throw ConfigError("unknown activation function '" + name + "'");
}

AggregationFn parse_aggregation(const std::string& name) {
  if (name == "sum") return AggregationFn::Sum;
  throw ConfigError("unknown aggregation function '" + name + "'");
}

double apply_activation(ActivationFn fn, double x) {
  switch (fn) {
    case ActivationFn::Sigmoid: {
      const double z = std::clamp(5.0 * x, -60.0, 60.0);
      return 1.0 / (1.0 + std::exp(-z));
    }
    case ActivationFn::Gauss: {
      const double z = std::clamp(x, -3.4, 3.4);
      return std::exp(-5.0 * z * z);
    }
  }
  return 0.0;
}

bool structurally_equal(const Genome& a, const Genome& b) {
  return a.nodes == b.nodes && a.connections == b.connections;
}

namespace {

struct InitialConnection {
  enum class Kind { Full, None, Partial } kind = Kind::Partial;
  double fraction = 0.5;
};

InitialConnection parse_initial_connection(const std::string& text) {
  InitialConnection ic;
  if (text == "full") {
    ic.kind = InitialConnection::Kind::Full;
    return ic;
  }
  if (text == "none") {
    ic.kind = InitialConnection::Kind::None;
    return ic;
  }
  const std::string prefix = "partial ";
  if (text.rfind(prefix, 0) == 0) {
    ic.kind = InitialConnection::Kind::Partial;
    ic.fraction = parse_double(text.substr(prefix.size()), "initial_connection");
    if (!(ic.fraction >= 0.0 && ic.fraction <= 1.0))
      throw ValidationError("initial_connection fraction must be in [0, 1]");
    return ic;
  }
  throw ValidationError("initial_connection must be 'full', 'none', or 'partial <p>'");
}

void check_rate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError(std::string(name) + " must be in [0, 1]");
}

}  // namespace

void NEATConfig::validate() const {
  if (fitness_criterion != "max" && fitness_criterion != "mean" &&
      fitness_criterion != "min")
    throw ValidationError("fitness_criterion must be max, mean, or min");
  if (pop_size < 2) throw ValidationError("pop_size must be >= 2");
  check_rate(activation_mutate_rate, "activation_mutate_rate");
  check_rate(aggregation_mutate_rate, "aggregation_mutate_rate");
  check_rate(bias_mutate_rate, "bias_mutate_rate");
  check_rate(bias_replace_rate, "bias_replace_rate");
  check_rate(conn_add_prob, "conn_add_prob");
  check_rate(conn_delete_prob, "conn_delete_prob");
  check_rate(enabled_mutate_rate, "enabled_mutate_rate");
  check_rate(node_add_prob, "node_add_prob");
  check_rate(node_delete_prob, "node_delete_prob");
  check_rate(response_mutate_rate, "response_mutate_rate");
  check_rate(response_replace_rate, "response_replace_rate");
  check_rate(weight_mutate_rate, "weight_mutate_rate");
  check_rate(weight_replace_rate, "weight_replace_rate");
  check_rate(survival_threshold, "survival_threshold");
  if (activation_options.empty())
    throw ValidationError("activation_options must not be empty");
  for (const auto& o : activation_options) parse_activation(o);
  if (activation_default != "random") parse_activation(activation_default);
  if (aggregation_options.empty())
    throw ValidationError("aggregation_options must not be empty");
  for (const auto& o : aggregation_options) parse_aggregation(o);
  if (aggregation_default != "random") parse_aggregation(aggregation_default);
  if (bias_init_stdev < 0.0 || response_init_stdev < 0.0 || weight_init_stdev < 0.0)
    throw ValidationError("init stdev values must be >= 0");
  if (bias_mutate_power < 0.0 || response_mutate_power < 0.0 ||
      weight_mutate_power < 0.0)
    throw ValidationError("mutate power values must be >= 0");
  if (bias_max_value < bias_min_value)
    throw ValidationError("bias_max_value must be >= bias_min_value");
  if (response_max_value < response_min_value)
    throw ValidationError("response_max_value must be >= response_min_value");
  if (weight_max_value < weight_min_value)
    throw ValidationError("weight_max_value must be >= weight_min_value");
  if (num_inputs < 1) throw ValidationError("num_inputs must be >= 1");
  if (num_outputs < 1 || num_outputs > kActionCount)
    throw ValidationError("num_outputs must be in [1, 7]");
  if (num_hidden < 0) throw ValidationError("num_hidden must be >= 0");
  if (compatibility_threshold < 0.0)
    throw ValidationError("compatibility_threshold must be >= 0");
  if (compatibility_disjoint_coefficient < 0.0 || compatibility_weight_coefficient < 0.0)
    throw ValidationError("compatibility coefficients must be >= 0");
  if (species_fitness_func != "max" && species_fitness_func != "mean" &&
      species_fitness_func != "min")
    throw ValidationError("species_fitness_func must be max, mean, or min");
  if (max_stagnation < 0) throw ValidationError("max_stagnation must be >= 0");
  if (species_elitism < 0) throw ValidationError("species_elitism must be >= 0");
  if (elitism < 0) throw ValidationError("elitism must be >= 0");
  parse_initial_connection(initial_connection);
  if (fitness_threshold != fitness_threshold)
    throw ValidationError("fitness_threshold must not be NaN");
}

long long InnovationRegistry::connection_innovation(int in_node, int out_node) {
  const ConnKey key{in_node, out_node};
  auto it = conn_innovations_.find(key);
  if (it != conn_innovations_.end()) return it->second;
  const long long id = next_innovation_++;
  conn_innovations_.emplace(key, id);
  return id;
}

int InnovationRegistry::split_node_id(int in_node, int out_node) {
  const ConnKey key{in_node, out_node};
  auto it = split_nodes_.find(key);
  if (it != split_nodes_.end()) return it->second;
  const int id = next_node_id_++;
  split_nodes_.emplace(key, id);
  return id;
}

InnovationRegistry make_registry(const NEATConfig& config) {
  return InnovationRegistry(
      static_cast<int>(config.num_inputs + config.num_outputs + config.num_hidden));
}

namespace {

ActivationFn pick_activation(const NEATConfig& c, Rng* rng) {
  if (c.activation_default == "random") {
    if (rng != nullptr)
      return parse_activation(
          c.activation_options[next_index(*rng, c.activation_options.size())]);
    return parse_activation(c.activation_options.front());
  }
  return parse_activation(c.activation_default);
}

AggregationFn pick_aggregation(const NEATConfig& c, Rng* rng) {
  if (c.aggregation_default == "random") {
    if (rng != nullptr)
      return parse_aggregation(
          c.aggregation_options[next_index(*rng, c.aggregation_options.size())]);
    return parse_aggregation(c.aggregation_options.front());
  }
  return parse_aggregation(c.aggregation_default);
}

double draw_clamped(double mean, double stdev, double lo, double hi, Rng& rng) {
  return clamp_value(mean + stdev * next_normal(rng), lo, hi);
}

// Draw order for non-input nodes: bias, response, activation, aggregation.
NodeGene make_node(int id, NodeKind kind, const NEATConfig& c, Rng& rng) {
  NodeGene n;
  n.id = id;
  n.kind = kind;
  if (kind == NodeKind::Input) {
    n.bias = 0.0;
    n.response = 1.0;
    n.activation = pick_activation(c, nullptr);
    n.aggregation = pick_aggregation(c, nullptr);
    return n;
  }
  n.bias = draw_clamped(c.bias_init_mean, c.bias_init_stdev, c.bias_min_value,
                        c.bias_max_value, rng);
  n.response = draw_clamped(c.response_init_mean, c.response_init_stdev,
                            c.response_min_value, c.response_max_value, rng);
  n.activation = pick_activation(c, &rng);
  n.aggregation = pick_aggregation(c, &rng);
  return n;
}

std::vector<ConnKey> initial_pair_candidates(const NEATConfig& c) {
  const int I = static_cast<int>(c.num_inputs);
  const int O = static_cast<int>(c.num_outputs);
  const int H = static_cast<int>(c.num_hidden);
  std::vector<ConnKey> pairs;
  if (H > 0) {
    for (int in = 0; in < I; ++in)
      for (int h = I + O; h < I + O + H; ++h) pairs.emplace_back(in, h);
    for (int h = I + O; h < I + O + H; ++h)
      for (int out = I; out < I + O; ++out) pairs.emplace_back(h, out);
  } else {
    for (int in = 0; in < I; ++in)
      for (int out = I; out < I + O; ++out) pairs.emplace_back(in, out);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

// True when adding in_node -> out_node would close a directed cycle over the
// existing connection keys (enabled or not).
bool creates_cycle(const std::map<ConnKey, ConnectionGene>& connections, int in_node,
                   int out_node) {
  if (in_node == out_node) return true;
  std::set<int> visited{out_node};
  std::vector<int> frontier{out_node};
  while (!frontier.empty()) {
    const int node = frontier.back();
    frontier.pop_back();
    for (const auto& [key, conn] : connections) {
      (void)conn;
      if (key.first != node) continue;
      if (key.second == in_node) return true;
      if (visited.insert(key.second).second) frontier.push_back(key.second);
    }
  }
  return false;
}

}  // namespace

Genome init_genome(const NEATConfig& config, InnovationRegistry& registry, Rng& rng,
                   int key) {
  const int I = static_cast<int>(config.num_inputs);
  const int O = static_cast<int>(config.num_outputs);
  const int H = static_cast<int>(config.num_hidden);
  Genome g;
  g.key = key;
  for (int id = 0; id < I; ++id)
    g.nodes.emplace(id, make_node(id, NodeKind::Input, config, rng));
  for (int id = I; id < I + O; ++id)
    g.nodes.emplace(id, make_node(id, NodeKind::Output, config, rng));
  for (int id = I + O; id < I + O + H; ++id)
    g.nodes.emplace(id, make_node(id, NodeKind::Hidden, config, rng));

  const InitialConnection ic = parse_initial_connection(config.initial_connection);
  if (ic.kind == InitialConnection::Kind::None) return g;
  for (const ConnKey& pair : initial_pair_candidates(config)) {
    if (ic.kind == InitialConnection::Kind::Partial &&
        !(next_double(rng) < ic.fraction))
      continue;
    ConnectionGene conn;
    conn.in_node = pair.first;
    conn.out_node = pair.second;
    conn.weight = draw_clamped(config.weight_init_mean, config.weight_init_stdev,
                               config.weight_min_value, config.weight_max_value, rng);
    conn.enabled = config.enabled_default;
    conn.innovation = registry.connection_innovation(pair.first, pair.second);
    g.connections.emplace(pair, conn);
  }
  return g;
}

Network::Network(const Genome& genome, const NEATConfig& config) {
  feed_forward_ = config.feed_forward;
  num_inputs_ = static_cast<std::size_t>(config.num_inputs);

  std::map<int, std::size_t> slot_of;
  for (const auto& [id, node] : genome.nodes) {
    (void)node;
    const std::size_t s = slot_of.size();
    slot_of.emplace(id, s);
  }
  for (int id = 0; id < static_cast<int>(config.num_inputs); ++id) {
    auto it = genome.nodes.find(id);
    if (it == genome.nodes.end() || it->second.kind != NodeKind::Input)
      throw ValidationError("genome is missing input node " + std::to_string(id));
  }

  // Incoming enabled connections per target node.
  std::map<int, std::vector<std::pair<std::size_t, double>>> incoming;
  for (const auto& [key, conn] : genome.connections) {
    if (!conn.enabled) continue;
    incoming[key.second].emplace_back(slot_of.at(key.first), conn.weight);
  }

  std::vector<int> order;
  if (!feed_forward_) {
    for (const auto& [id, node] : genome.nodes)
      if (node.kind != NodeKind::Input) order.push_back(id);
  } else {
    // Kahn's algorithm over enabled connections, smallest node id first.
    std::map<int, int> indegree;
    for (const auto& [id, node] : genome.nodes) {
      (void)node;
      indegree[id] = 0;
    }
    for (const auto& [key, conn] : genome.connections)
      if (conn.enabled) indegree[key.second] += 1;
    std::set<int> ready;
    for (const auto& [id, deg] : indegree)
      if (deg == 0) ready.insert(id);
    std::size_t processed = 0;
    while (!ready.empty()) {
      const int id = *ready.begin();
      ready.erase(ready.begin());
      ++processed;
      if (genome.nodes.at(id).kind != NodeKind::Input) order.push_back(id);
      for (const auto& [key, conn] : genome.connections) {
        if (!conn.enabled || key.first != id) continue;
        if (--indegree[key.second] == 0) ready.insert(key.second);
      }
    }
    if (processed != genome.nodes.size())
      throw ValidationError("feed-forward network contains a cycle");
  }

  for (int id : order) {
    const NodeGene& node = genome.nodes.at(id);
    NodeEval ev;
    ev.slot = slot_of.at(id);
    ev.bias = node.bias;
    ev.response = node.response;
    ev.activation = node.activation;
    auto it = incoming.find(id);
    if (it != incoming.end()) ev.incoming = it->second;
    evals_.push_back(std::move(ev));
  }

  output_slots_.reserve(static_cast<std::size_t>(config.num_outputs));
  for (int id = static_cast<int>(config.num_inputs);
       id < static_cast<int>(config.num_inputs + config.num_outputs); ++id) {
    auto it = genome.nodes.find(id);
    if (it == genome.nodes.end() || it->second.kind != NodeKind::Output)
      throw ValidationError("genome is missing output node " + std::to_string(id));
    output_slots_.push_back(slot_of.at(id));
  }

  values_a_.assign(genome.nodes.size(), 0.0);
  values_b_.assign(genome.nodes.size(), 0.0);
  outputs_.assign(static_cast<std::size_t>(config.num_outputs), 0.0);
}

void Network::reset() {
  std::fill(values_a_.begin(), values_a_.end(), 0.0);
  std::fill(values_b_.begin(), values_b_.end(), 0.0);
  active_a_ = true;
}

const std::vector<double>& Network::activate(const std::vector<double>& inputs) {
  if (inputs.size() != num_inputs_)
    throw DimensionMismatch("expected " + std::to_string(num_inputs_) +
                            " inputs, got " + std::to_string(inputs.size()));
  if (feed_forward_) {
    auto& v = values_a_;
    for (std::size_t i = 0; i < num_inputs_; ++i) v[i] = inputs[i];
    for (const NodeEval& ev : evals_) {
      double s = 0.0;
      for (const auto& [src, w] : ev.incoming) s += v[src] * w;
      v[ev.slot] = apply_activation(ev.activation, ev.bias + ev.response * s);
    }
    for (std::size_t i = 0; i < output_slots_.size(); ++i) outputs_[i] = v[output_slots_[i]];
    return outputs_;
  }
  // Recurrent single step: non-input sources are read from the previous step.
  auto& prev = active_a_ ? values_a_ : values_b_;
  auto& curr = active_a_ ? values_b_ : values_a_;
  active_a_ = !active_a_;
  for (std::size_t i = 0; i < num_inputs_; ++i) {
    prev[i] = inputs[i];
    curr[i] = inputs[i];
  }
  for (const NodeEval& ev : evals_) {
    double s = 0.0;
    for (const auto& [src, w] : ev.incoming) s += prev[src] * w;
    curr[ev.slot] = apply_activation(ev.activation, ev.bias + ev.response * s);
  }
  for (std::size_t i = 0; i < output_slots_.size(); ++i) outputs_[i] = curr[output_slots_[i]];
  return outputs_;
}

Action Network::choose_action(const std::vector<double>& inputs) {
  const std::vector<double>& scores = activate(inputs);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return static_cast<Action>(best);
}

double compatibility_distance(const Genome& g1, const Genome& g2,
                              const NEATConfig& config) {
  long long disjoint = 0;
  long long matching_nodes = 0;
  double bias_diff = 0.0;
  long long non_input_1 = 0;
  long long non_input_2 = 0;

  for (const auto& [id, node] : g1.nodes) {
    if (node.kind == NodeKind::Input) continue;
    ++non_input_1;
    auto it = g2.nodes.find(id);
    if (it == g2.nodes.end()) {
      ++disjoint;
    } else {
      ++matching_nodes;
      bias_diff += std::abs(node.bias - it->second.bias);
    }
  }
  for (const auto& [id, node] : g2.nodes) {
    if (node.kind == NodeKind::Input) continue;
    ++non_input_2;
    if (g1.nodes.find(id) == g1.nodes.end()) ++disjoint;
  }

  long long matching_conns = 0;
  double weight_diff = 0.0;
  for (const auto& [key, conn] : g1.connections) {
    auto it = g2.connections.find(key);
    if (it == g2.connections.end()) {
      ++disjoint;
    } else {
      ++matching_conns;
      weight_diff += std::abs(conn.weight - it->second.weight);
    }
  }
  for (const auto& [key, conn] : g2.connections) {
    (void)conn;
    if (g1.connections.find(key) == g1.connections.end()) ++disjoint;
  }

  const long long count1 = non_input_1 + static_cast<long long>(g1.connections.size());
  const long long count2 = non_input_2 + static_cast<long long>(g2.connections.size());
  const double n = static_cast<double>(std::max<long long>(1, std::max(count1, count2)));
  const double node_term =
      matching_nodes > 0 ? bias_diff / static_cast<double>(matching_nodes) : 0.0;
  const double conn_term =
      matching_conns > 0 ? weight_diff / static_cast<double>(matching_conns) : 0.0;
  return config.compatibility_disjoint_coefficient * static_cast<double>(disjoint) / n +
         config.compatibility_weight_coefficient * (conn_term + node_term);
}

void speciate(const Population& population, SpeciesSet& species_set,
              const NEATConfig& config) {
  for (auto& [sid, sp] : species_set.species) {
    (void)sid;
    sp.member_keys.clear();
  }
  for (const auto& [key, genome] : population) {
    bool placed = false;
    for (auto& [sid, sp] : species_set.species) {
      (void)sid;
      if (compatibility_distance(genome, sp.representative, config) <
          config.compatibility_threshold) {
        sp.member_keys.push_back(key);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species s;
      s.id = species_set.next_species_id++;
      s.representative = genome;
      s.member_keys.push_back(key);
      species_set.species.emplace(s.id, std::move(s));
    }
  }
  for (auto it = species_set.species.begin(); it != species_set.species.end();) {
    if (it->second.member_keys.empty())
      it = species_set.species.erase(it);
    else
      ++it;
  }
  // Next generation's representative: the member closest to the old one.
  for (auto& [sid, sp] : species_set.species) {
    (void)sid;
    double best_d = std::numeric_limits<double>::infinity();
    int best_key = sp.member_keys.front();
    for (int key : sp.member_keys) {
      const double d =
          compatibility_distance(population.at(key), sp.representative, config);
      if (d < best_d) {
        best_d = d;
        best_key = key;
      }
    }
    sp.representative = population.at(best_key);
  }
}

Genome crossover(const Genome& parent1, const Genome& parent2, Rng& rng) {
  const Genome* p1 = &parent1;
  const Genome* p2 = &parent2;
  if (p2->fitness > p1->fitness ||
      (p2->fitness == p1->fitness && p2->key < p1->key)) {
    std::swap(p1, p2);
  }
  Genome child;
  for (const auto& [id, gene] : p1->nodes) {
    auto it = p2->nodes.find(id);
    if (it == p2->nodes.end()) {
      child.nodes.emplace(id, gene);
    } else {
      child.nodes.emplace(id, next_double(rng) < 0.5 ? gene : it->second);
    }
  }
  for (const auto& [key, gene] : p1->connections) {
    auto it = p2->connections.find(key);
    if (it == p2->connections.end()) {
      child.connections.emplace(key, gene);
      continue;
    }
    ConnectionGene g = next_double(rng) < 0.5 ? gene : it->second;
    if (!(gene.enabled && it->second.enabled)) g.enabled = next_double(rng) >= 0.5;
    child.connections.emplace(key, g);
  }
  return child;
}

namespace {

void mutate_add_connection(Genome& g, const NEATConfig& c, InnovationRegistry& registry,
                           Rng& rng) {
  std::vector<ConnKey> candidates;
  for (const auto& [sid, source] : g.nodes) {
    (void)source;
    for (const auto& [tid, target] : g.nodes) {
      if (target.kind == NodeKind::Input) continue;
      if (g.connections.count(ConnKey{sid, tid}) != 0) continue;
      if (c.feed_forward && creates_cycle(g.connections, sid, tid)) continue;
      candidates.emplace_back(sid, tid);
    }
  }
  if (candidates.empty()) return;
  const ConnKey key = candidates[next_index(rng, candidates.size())];
  ConnectionGene conn;
  conn.in_node = key.first;
  conn.out_node = key.second;
  conn.weight = draw_clamped(c.weight_init_mean, c.weight_init_stdev,
                             c.weight_min_value, c.weight_max_value, rng);
  conn.enabled = c.enabled_default;
  conn.innovation = registry.connection_innovation(key.first, key.second);
  g.connections.emplace(key, conn);
}

void mutate_delete_connection(Genome& g, Rng& rng) {
  if (g.connections.empty()) return;
  std::vector<ConnKey> keys;
  keys.reserve(g.connections.size());
  for (const auto& [key, conn] : g.connections) {
    (void)conn;
    keys.push_back(key);
  }
  g.connections.erase(keys[next_index(rng, keys.size())]);
}

void mutate_add_node(Genome& g, const NEATConfig& c, InnovationRegistry& registry,
                     Rng& rng) {
  std::vector<ConnKey> enabled_keys;
  for (const auto& [key, conn] : g.connections)
    if (conn.enabled) enabled_keys.push_back(key);
  if (enabled_keys.empty()) return;
  const ConnKey key = enabled_keys[next_index(rng, enabled_keys.size())];
  const int new_id = registry.split_node_id(key.first, key.second);
  if (g.nodes.count(new_id) != 0) return;  // this connection was split before

  ConnectionGene& old_conn = g.connections.at(key);
  const double old_weight = old_conn.weight;
  old_conn.enabled = false;
  g.nodes.emplace(new_id, make_node(new_id, NodeKind::Hidden, c, rng));

  ConnectionGene in_half;
  in_half.in_node = key.first;
  in_half.out_node = new_id;
  in_half.weight = 1.0;
  in_half.enabled = true;
  in_half.innovation = registry.connection_innovation(key.first, new_id);
  g.connections.emplace(ConnKey{key.first, new_id}, in_half);

  ConnectionGene out_half;
  out_half.in_node = new_id;
  out_half.out_node = key.second;
  out_half.weight = old_weight;
  out_half.enabled = true;
  out_half.innovation = registry.connection_innovation(new_id, key.second);
  g.connections.emplace(ConnKey{new_id, key.second}, out_half);
}

void mutate_delete_node(Genome& g, Rng& rng) {
  std::vector<int> hidden;
  for (const auto& [id, node] : g.nodes)
    if (node.kind == NodeKind::Hidden) hidden.push_back(id);
  if (hidden.empty()) return;
  const int victim = hidden[next_index(rng, hidden.size())];
  g.nodes.erase(victim);
  for (auto it = g.connections.begin(); it != g.connections.end();) {
    if (it->first.first == victim || it->first.second == victim)
      it = g.connections.erase(it);
    else
      ++it;
  }
}

// Shared perturb-or-replace pattern for weights, biases, and responses.
double mutate_scalar(double value, double mutate_rate, double replace_rate,
                     double power, double init_mean, double init_stdev, double lo,
                     double hi, Rng& rng) {
  const double r = next_double(rng);
  if (r < mutate_rate)
    return clamp_value(value + power * next_normal(rng), lo, hi);
  if (r < mutate_rate + replace_rate)
    return draw_clamped(init_mean, init_stdev, lo, hi, rng);
  return value;
}

}  // namespace

void mutate(Genome& genome, const NEATConfig& config, InnovationRegistry& registry,
            Rng& rng) {
  if (next_double(rng) < config.conn_add_prob)
    mutate_add_connection(genome, config, registry, rng);
  if (next_double(rng) < config.conn_delete_prob) mutate_delete_connection(genome, rng);
  if (next_double(rng) < config.node_add_prob)
    mutate_add_node(genome, config, registry, rng);
  if (next_double(rng) < config.node_delete_prob) mutate_delete_node(genome, rng);

  for (auto& [key, conn] : genome.connections) {
    (void)key;
    conn.weight = mutate_scalar(conn.weight, config.weight_mutate_rate,
                                config.weight_replace_rate, config.weight_mutate_power,
                                config.weight_init_mean, config.weight_init_stdev,
                                config.weight_min_value, config.weight_max_value, rng);
    if (next_double(rng) < config.enabled_mutate_rate) conn.enabled = !conn.enabled;
  }
  for (auto& [id, node] : genome.nodes) {
    (void)id;
    if (node.kind == NodeKind::Input) continue;
    node.bias = mutate_scalar(node.bias, config.bias_mutate_rate,
                              config.bias_replace_rate, config.bias_mutate_power,
                              config.bias_init_mean, config.bias_init_stdev,
                              config.bias_min_value, config.bias_max_value, rng);
    node.response = mutate_scalar(
        node.response, config.response_mutate_rate, config.response_replace_rate,
        config.response_mutate_power, config.response_init_mean,
        config.response_init_stdev, config.response_min_value,
        config.response_max_value, rng);
    if (next_double(rng) < config.activation_mutate_rate) {
      node.activation = parse_activation(config.activation_options[next_index(
          rng, config.activation_options.size())]);
    }
    if (next_double(rng) < config.aggregation_mutate_rate) {
      node.aggregation = parse_aggregation(config.aggregation_options[next_index(
          rng, config.aggregation_options.size())]);
    }
  }
}

long long mating_pool_size(long long species_size, double survival_threshold) {
  const auto pool = static_cast<long long>(
      std::ceil(survival_threshold * static_cast<double>(species_size)));
  return std::max<long long>(1, std::min(pool, species_size));
}

namespace {

double fitness_func_value(const std::string& func, const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  if (func == "max") return *std::max_element(values.begin(), values.end());
  if (func == "min") return *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Largest-remainder apportionment of pop_size among non-negative weights;
// every species is bumped to at least one slot while a donor exists.
std::vector<long long> apportion(const std::vector<double>& weights, long long total,
                                 const std::vector<int>& ids) {
  const std::size_t n = weights.size();
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<double> shares(n);
  for (std::size_t i = 0; i < n; ++i)
    shares[i] = sum > 0.0 ? static_cast<double>(total) * weights[i] / sum
                          : static_cast<double>(total) / static_cast<double>(n);
  std::vector<long long> quota(n);
  long long allocated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    quota[i] = static_cast<long long>(std::floor(shares[i]));
    allocated += quota[i];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = shares[a] - std::floor(shares[a]);
    const double rb = shares[b] - std::floor(shares[b]);
    if (ra != rb) return ra > rb;
    return ids[a] < ids[b];
  });
  std::size_t cursor = 0;
  while (allocated < total) {
    quota[order[cursor % n]] += 1;
    ++allocated;
    ++cursor;
  }
  cursor = n;
  while (allocated > total) {
    --cursor;
    if (quota[order[cursor % n]] > 0) {
      quota[order[cursor % n]] -= 1;
      --allocated;
    }
    if (cursor == 0) cursor = n;
  }
  // Bump empty species to one slot, taking from the largest quota.
  for (std::size_t i = 0; i < n; ++i) {
    if (quota[i] != 0) continue;
    std::size_t donor = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (quota[j] >= 2 && (donor == n || quota[j] > quota[donor])) donor = j;
    }
    if (donor == n) break;
    quota[donor] -= 1;
    quota[i] += 1;
  }
  return quota;
}

}  // namespace

Population reproduce(SpeciesSet& species_set, const Population& population,
                     const NEATConfig& config, InnovationRegistry& registry,
                     int& next_genome_key, Rng& rng) {
  // Stagnation accounting on the configured species fitness.
  std::map<int, double> current_fitness;
  for (auto& [sid, sp] : species_set.species) {
    std::vector<double> fits;
    fits.reserve(sp.member_keys.size());
    for (int key : sp.member_keys) fits.push_back(population.at(key).fitness);
    const double cur = fitness_func_value(config.species_fitness_func, fits);
    current_fitness[sid] = cur;
    if (!sp.fitness_initialized || cur > sp.best_fitness_ever) {
      sp.best_fitness_ever = cur;
      sp.fitness_initialized = true;
      sp.generations_since_improvement = 0;
    } else {
      sp.generations_since_improvement += 1;
    }
  }

  // The species_elitism fittest species are immune to stagnation culling.
  std::vector<int> by_fitness;
  for (const auto& [sid, sp] : species_set.species) {
    (void)sp;
    by_fitness.push_back(sid);
  }
  std::sort(by_fitness.begin(), by_fitness.end(), [&](int a, int b) {
    if (current_fitness[a] != current_fitness[b])
      return current_fitness[a] > current_fitness[b];
    return a < b;
  });
  std::set<int> protected_ids;
  for (std::size_t i = 0;
       i < by_fitness.size() && i < static_cast<std::size_t>(config.species_elitism);
       ++i)
    protected_ids.insert(by_fitness[i]);
  for (auto it = species_set.species.begin(); it != species_set.species.end();) {
    if (protected_ids.count(it->first) == 0 &&
        it->second.generations_since_improvement > config.max_stagnation) {
      it = species_set.species.erase(it);
    } else {
      ++it;
    }
  }
  if (species_set.species.empty()) return {};

  // Normalized member fitness keeps quotas meaningful for negative scores.
  double min_fit = std::numeric_limits<double>::infinity();
  double max_fit = -std::numeric_limits<double>::infinity();
  for (const auto& [sid, sp] : species_set.species) {
    (void)sid;
    for (int key : sp.member_keys) {
      min_fit = std::min(min_fit, population.at(key).fitness);
      max_fit = std::max(max_fit, population.at(key).fitness);
    }
  }
  const double range = max_fit - min_fit;

  std::vector<int> ids;
  std::vector<double> weights;
  for (const auto& [sid, sp] : species_set.species) {
    ids.push_back(sid);
    double mean_nf = 0.0;
    if (range > 0.0) {
      for (int key : sp.member_keys)
        mean_nf += (population.at(key).fitness - min_fit) / range;
      mean_nf /= static_cast<double>(sp.member_keys.size());
    } else {
      mean_nf = 1.0;
    }
    weights.push_back(mean_nf / static_cast<double>(sp.member_keys.size()));
  }
  const std::vector<long long> quotas = apportion(weights, config.pop_size, ids);

  Population next;
  for (std::size_t si = 0; si < ids.size(); ++si) {
    Species& sp = species_set.species.at(ids[si]);
    long long quota = quotas[si];
    if (quota <= 0) continue;

    std::vector<int> ranked = sp.member_keys;
    std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
      const double fa = population.at(a).fitness;
      const double fb = population.at(b).fitness;
      if (fa != fb) return fa > fb;
      return a < b;
    });

    const long long elite_count =
        std::min<long long>(config.elitism, std::min<long long>(quota, ranked.size()));
    for (long long e = 0; e < elite_count; ++e) {
      const Genome& elite = population.at(ranked[static_cast<std::size_t>(e)]);
      next.emplace(elite.key, elite);
    }
    quota -= elite_count;

    const long long pool_n = mating_pool_size(static_cast<long long>(ranked.size()),
                                              config.survival_threshold);
    std::vector<int> pool(ranked.begin(), ranked.begin() + pool_n);
    for (long long c = 0; c < quota; ++c) {
      Genome child;
      if (pool.size() == 1) {
        const Genome& parent = population.at(pool.front());
        child.nodes = parent.nodes;
        child.connections = parent.connections;
      } else {
        const Genome& pa = population.at(pool[next_index(rng, pool.size())]);
        const Genome& pb = population.at(pool[next_index(rng, pool.size())]);
        child = crossover(pa, pb, rng);
      }
      child.key = next_genome_key++;
      child.fitness = std::numeric_limits<double>::quiet_NaN();
      child.evaluated = false;
      mutate(child, config, registry, rng);
      next.emplace(child.key, child);
    }
  }
  return next;
}

std::pair<EpisodeSummary, Replay> play_genome(const Genome& genome,
                                              const LevelSpec& level,
                                              const NEATConfig& config,
                                              const FitnessParams& params,
                                              const ObsConfig& obs,
                                              long long move_budget,
                                              long long stagnation_window) {
  if (config.num_inputs != static_cast<long long>(obs.length()))
    throw DimensionMismatch("num_inputs " + std::to_string(config.num_inputs) +
                            " does not match observation length " +
                            std::to_string(obs.length()));
  Network net(genome, config);
  net.reset();
  ActionSource source = [&net](const ObservationProvider& provider) {
    return net.choose_action(provider.vec());
  };
  return run_episode(level, source, move_budget, stagnation_window, params, obs);
}

long long default_move_budget(const LevelSpec& level) {
  // Three full life timers plus slack: no live episode can outlast this.
  return 3LL * level.max_time * level.clock_divisor + 3;
}

NeatResult run_neat(const LevelSpec& level, const NEATConfig& config,
                    const FitnessParams& params, const ConstraintSpec& constraints,
                    const NeatRunOptions& options) {
  config.validate();
  if (options.max_generations < 1)
    throw ValidationError("max_generations must be >= 1");
  if (options.stagnation_window < 1)
    throw ValidationError("stagnation_window must be >= 1");
  if (config.num_inputs != static_cast<long long>(options.obs.length()))
    throw DimensionMismatch("num_inputs " + std::to_string(config.num_inputs) +
                            " does not match observation length " +
                            std::to_string(options.obs.length()));
  const long long move_budget =
      options.move_budget > 0 ? options.move_budget : default_move_budget(level);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_seconds = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  InnovationRegistry registry = make_registry(config);
  Population population;
  int next_genome_key = 1;
  {
    Rng rng = make_stream(options.seed, kInitTag);
    for (long long i = 0; i < config.pop_size; ++i) {
      Genome g = init_genome(config, registry, rng, next_genome_key++);
      population.emplace(g.key, g);
    }
  }
  SpeciesSet species_set;

  NeatResult result;
  bool have_best = false;
  long long generation = 0;

  while (true) {
    // Evaluate everything that reproduction did not carry over unchanged.
    std::vector<Genome*> pending;
    for (auto& [key, genome] : population) {
      (void)key;
      if (!genome.evaluated) pending.push_back(&genome);
    }
    parallel_for(pending.size(), [&](std::size_t i) {
      Genome& g = *pending[i];
      auto [summary, replay] = play_genome(g, level, config, params, options.obs,
                                           move_budget, options.stagnation_window);
      (void)replay;
      g.summary = summary;
      g.moves_used = summary.moves_used;
      g.fitness = compute_fitness(summary, params);
      g.evaluated = true;
    });
    result.episodes_evaluated += static_cast<long long>(pending.size());

    const Genome* gen_best = nullptr;
    double best = -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& [key, genome] : population) {
      (void)key;
      if (gen_best == nullptr || genome.fitness > gen_best->fitness)
        gen_best = &genome;
      best = std::max(best, genome.fitness);
      worst = std::min(worst, genome.fitness);
      sum += genome.fitness;
    }

    if (!have_best || gen_best->fitness > result.best.fitness) {
      result.best = *gen_best;
      result.generation_of_best = generation;
      result.mutations_at_best = result.mutations_performed;
      auto [summary, replay] = play_genome(*gen_best, level, config, params,
                                           options.obs, move_budget,
                                           options.stagnation_window);
      (void)summary;
      result.best_replay = replay;
      have_best = true;
    } else {
      result.stuck_events += 1;
    }

    GenerationStats rec;
    rec.generation = generation;
    rec.best = best;
    rec.mean = sum / static_cast<double>(population.size());
    rec.worst = worst;
    rec.stuck_cumulative = result.stuck_events;
    rec.solved = is_solution(gen_best->summary, constraints);
    if (options.record_wall_clock) rec.elapsed_wall = elapsed_seconds();
    result.history.push_back(rec);
    if (options.on_generation) options.on_generation(rec);

    result.generations_run = generation + 1;
    if (rec.solved) {
      result.solved = true;
      break;
    }
    std::vector<double> all_fitness;
    all_fitness.reserve(population.size());
    for (const auto& [key, genome] : population) {
      (void)key;
      all_fitness.push_back(genome.fitness);
    }
    if (fitness_func_value(config.fitness_criterion, all_fitness) >=
        config.fitness_threshold)
      break;
    if (generation + 1 >= options.max_generations) break;
    if (options.should_stop && options.should_stop()) break;

    speciate(population, species_set, config);
    Rng repro_rng = make_stream(options.seed, kReproTag,
                                static_cast<std::uint64_t>(generation));
    Population next = reproduce(species_set, population, config, registry,
                                next_genome_key, repro_rng);
    for (const auto& [key, genome] : next) {
      (void)key;
      if (!genome.evaluated) result.mutations_performed += 1;
    }
    if (next.empty()) {
      if (!config.reset_on_extinction) break;
      Rng reset_rng = make_stream(options.seed, kResetTag,
                                  static_cast<std::uint64_t>(generation));
      next.clear();
      for (long long i = 0; i < config.pop_size; ++i) {
        Genome g = init_genome(config, registry, reset_rng, next_genome_key++);
        next.emplace(g.key, g);
      }
    }
    population = std::move(next);
    ++generation;
  }
  return result;
}

}  // namespace evoplat::neat
