#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "trailsim/engine.hpp"
#include "trailsim/oracle.hpp"
#include "trailsim/rng.hpp"
#include "trailsim/scenario.hpp"

namespace fixtures {

using namespace trailsim;

inline std::string scenario_path(const std::string& name) { return std::string(TRAILSIM_SCENARIOS) + "/" + name + ".yaml"; }

inline ScenarioConfig linear() { return load_scenario(scenario_path("linear")); }
inline ScenarioConfig nonlinear() { return load_scenario(scenario_path("nonlinear")); }

/// Sensors on the x axis at the given coordinates; ends are entry/exit.
inline ParkGraph line(const std::vector<double>& xs, double rho = 15.0) {
  GraphSpec spec;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    spec.sensors.push_back({static_cast<SensorId>(i), {xs[i], 0.0}, rho, AttributeMask::all(),
                            i == 0 || i + 1 == xs.size()});
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    spec.edges.push_back({static_cast<SensorId>(i), static_cast<SensorId>(i + 1), std::nullopt, std::nullopt});
  }
  return build_graph(spec);
}

inline AttributeVector look(std::uint8_t top, std::uint8_t age, std::uint8_t gender, std::uint8_t bottom,
                            std::uint8_t acc, double speed) {
  AttributeVector v;
  v.set(Attribute::TopColor, top);
  v.set(Attribute::AgeGroup, age);
  v.set(Attribute::Gender, gender);
  v.set(Attribute::BottomColor, bottom);
  v.set(Attribute::Accessories, acc);
  v.set(Attribute::Activity, std::uint8_t{0});
  v.speed = speed;
  v.sync_activity();
  return v;
}

inline UserAgent agent(std::uint32_t id, std::vector<SensorId> route, double speed, Tick spawn,
                       AttributeVector attrs = look(0, 1, 0, 0, 0, 1.0)) {
  UserAgent u;
  u.true_id = id;
  u.route = std::move(route);
  attrs.speed = speed;
  u.attributes = attrs;
  u.spawn_tick = spawn;
  return u;
}

/// Scenario around an explicit graph and population with no perception noise.
inline ScenarioConfig clean(ParkGraph graph, std::vector<UserAgent> agents, PowerMode mode = PowerMode::AlwaysOn) {
  ScenarioConfig cfg;
  cfg.name = "fixture";
  cfg.graph = std::move(graph);
  cfg.population.fixed = std::move(agents);
  cfg.population.spawn_window_ticks = 1;
  cfg.mode = mode;
  cfg.protocol.selection.k = kAttributeCount;
  return cfg;
}

inline ScenarioConfig noiseless(ScenarioConfig cfg) {
  cfg.noise = NoiseModel::uniform(0.0, 0.0);
  cfg.population.distinct_attributes = true;
  return cfg;
}

/// Oracle rules mirroring a scenario's matching tolerances.
inline OracleRules oracle_rules(const ScenarioConfig& cfg) {
  OracleRules r;
  r.speed_rel = cfg.protocol.match.speed_rel;
  r.min_half_width = cfg.protocol.window.min_half_width;
  r.window_fraction = cfg.protocol.window.fraction;
  r.tick_seconds = cfg.tick_seconds;
  r.eta_gating = cfg.protocol.match.eta_gating;
  return r;
}

/// Identity partition produced by the online pipeline.
inline Partition online_partition(const RunResult& r) {
  Partition p(r.registry.unique_count());
  for (const Observation& o : r.observations) p[*r.registry.user_of(o.obs_id)].push_back(o.obs_id);
  return canonical(std::move(p));
}

/// Random small park: a line of 2-4 sensors or a three-spoke star, with 1-5
/// agents drawn from a narrow palette so appearances often collide. With
/// `distinct` every agent's appearance is unique.
inline ScenarioConfig micro(Rng& rng, bool distinct) {
  ParkGraph graph;
  if (rng.bernoulli(0.5)) {
    std::vector<double> xs{0.0};
    const std::size_t n = 2 + rng.index(3);
    for (std::size_t i = 1; i < n; ++i) xs.push_back(xs.back() + rng.uniform(40.0, 160.0));
    graph = line(xs);
  } else {
    GraphSpec spec;
    spec.sensors.push_back({0, {0.0, 0.0}, 15.0, AttributeMask::all(), false});
    const double turn = rng.uniform(0.0, 6.283185307179586);
    for (SensorId i = 1; i <= 3; ++i) {
      const double angle = turn + 2.0943951023931953 * i;
      const double len = rng.uniform(40.0, 160.0);
      spec.sensors.push_back({i, {len * std::cos(angle), len * std::sin(angle)}, 15.0, AttributeMask::all(), true});
      spec.edges.push_back({0, i, std::nullopt, std::nullopt});
    }
    graph = build_graph(spec);
  }
  const auto routes = graph.gateway_routes();
  std::vector<UserAgent> agents;
  std::set<std::vector<std::uint8_t>> looks;
  const std::size_t count = 1 + rng.index(5);
  for (std::uint32_t id = 0; id < count; ++id) {
    AttributeVector v;
    std::vector<std::uint8_t> key;
    do {
      v = look(static_cast<std::uint8_t>(rng.index(2)), static_cast<std::uint8_t>(rng.index(2)),
               static_cast<std::uint8_t>(rng.index(2)), 0, static_cast<std::uint8_t>(rng.index(2)), 1.0);
      key = {*v.get(Attribute::TopColor), *v.get(Attribute::AgeGroup), *v.get(Attribute::Gender),
             *v.get(Attribute::Accessories)};
    } while (distinct && !looks.insert(key).second);
    // Two speed groups keep some agents close enough to pass one another's checks.
    const double speed = rng.bernoulli(0.5) ? rng.uniform(1.2, 1.3) : rng.uniform(0.8, 6.0);
    agents.push_back(agent(id, routes[rng.index(routes.size())], speed, static_cast<Tick>(rng.index(40)), v));
  }
  ScenarioConfig cfg = clean(std::move(graph), std::move(agents));
  cfg.noise = NoiseModel::uniform(0.0, 0.0);
  cfg.mode = rng.bernoulli(0.5) ? PowerMode::AlwaysOn : PowerMode::DutyCycle;
  return cfg;
}

}  // namespace fixtures
