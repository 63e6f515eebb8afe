#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "trailsim/attributes.hpp"
#include "trailsim/graph.hpp"
#include "trailsim/rng.hpp"

namespace trailsim {

using Tick = std::int64_t;

/// Fractions of walkers, joggers and bikers.
struct ActivityMix {
  double walk = 0.4;
  double jog = 0.3;
  double bike = 0.3;
};

/// Value names and sampling weights of one categorical attribute.
struct Palette {
  std::vector<std::string> values;
  std::vector<double> weights;  // empty means uniform
};

inline Palette default_palette(Attribute a) {
  switch (a) {
    case Attribute::TopColor:
    case Attribute::BottomColor:
      return {{"black", "white", "grey", "blue", "red", "green", "yellow", "brown"}, {}};
    case Attribute::Activity: return {{"walk", "jog", "bike"}, {}};
    case Attribute::AgeGroup: return {{"child", "adult", "senior"}, {}};
    case Attribute::Gender: return {{"female", "male"}, {}};
    case Attribute::Accessories: return {{"none", "bag", "hat", "glasses"}, {}};
  }
  return {};
}

/// Where an agent is on its route: leg index and fraction of that leg walked.
struct RoutePosition {
  std::size_t leg = 0;
  double fraction = 0.0;
};

struct UserAgent {
  std::uint32_t true_id = 0;
  AttributeVector attributes;
  std::vector<SensorId> route;
  Tick spawn_tick = 0;
  RoutePosition position;
  double distance_travelled = 0.0;
};

struct PopulationConfig {
  std::size_t size = 100;
  ActivityMix mix;
  std::array<Palette, kAttributeCount> palettes = {
      default_palette(Attribute::TopColor), default_palette(Attribute::Activity),
      default_palette(Attribute::AgeGroup), default_palette(Attribute::Gender),
      default_palette(Attribute::BottomColor), default_palette(Attribute::Accessories)};
  Tick spawn_window_ticks = 600;
  /// Resample appearance until every agent's categorical vector is unique.
  bool distinct_attributes = false;
  /// Explicit agents; when present they replace sampling entirely.
  std::vector<UserAgent> fixed;
};

/// Exact integer counts for a mix, using largest-remainder rounding.
inline std::array<std::size_t, 3> apportion(std::size_t size, const ActivityMix& mix) {
  const std::array<double, 3> share = {mix.walk, mix.jog, mix.bike};
  for (double s : share) {
    if (!(s >= 0.0)) throw Error(ErrorCode::InvalidMix, "activity shares must be non-negative");
  }
  const double total = share[0] + share[1] + share[2];
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidMix, "activity mix sums to " + std::to_string(total) + ", expected 1");
  }
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = share[i] * static_cast<double>(size);
    // Nudge before flooring so 0.3 * 100 lands on 30, not 29.999...
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < size) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (remainder[i] > remainder[best]) best = i;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return counts;
}

namespace detail {

inline std::uint8_t draw_value(const Palette& p, Rng& rng) {
  if (p.weights.empty()) return static_cast<std::uint8_t>(rng.index(p.values.size()));
  return static_cast<std::uint8_t>(rng.weighted(p.weights));
}

inline std::uint64_t appearance_key(const AttributeVector& v, const AttributeMask& over = AttributeMask::all()) {
  std::uint64_t key = 0;
  for (Attribute a : kCatalogOrder) key = key * 16 + (over.contains(a) ? v.get(a).value_or(15) : 15);
  return key;
}

inline std::vector<UserAgent> checked_fixed(std::vector<UserAgent> agents, const ParkGraph& graph) {
  std::set<std::uint32_t> ids;
  for (UserAgent& u : agents) {
    const std::string who = "fixed agent " + std::to_string(u.true_id);
    if (!ids.insert(u.true_id).second) throw Error(ErrorCode::ConfigInvalid, who + " appears twice");
    if (u.route.size() < 2) throw Error(ErrorCode::ConfigInvalid, who + " needs a route of at least two sensors");
    for (std::size_t i = 0; i + 1 < u.route.size(); ++i) {
      if (!graph.edge_length(u.route[i], u.route[i + 1])) {
        throw Error(ErrorCode::NoRoute, who + " route is not a path at " + std::to_string(u.route[i]) + "-" +
                                            std::to_string(u.route[i + 1]));
      }
    }
    if (!graph.sensor(u.route.back()).always_on) {
      throw Error(ErrorCode::ConfigInvalid, who + " route must end at an entry/exit sensor");
    }
    if (u.spawn_tick < 0) throw Error(ErrorCode::ConfigInvalid, who + " has a negative spawn tick");
    classify_activity(u.attributes.speed);
    u.attributes.set(Attribute::Activity, std::uint8_t{0});
    u.attributes.sync_activity();
    u.position = {};
    u.distance_travelled = 0.0;
  }
  return agents;
}

}  // namespace detail

/// Draws the ground-truth population. Appearance, speed and spawn time come
/// from the population stream; routes from the routing stream. Distinct
/// appearances are judged over `catalog`, the attributes sensors can see.
inline std::vector<UserAgent> sample_population(const PopulationConfig& cfg, const ParkGraph& graph,
                                                std::uint64_t seed,
                                                const AttributeMask& catalog = AttributeMask::all()) {
  if (graph.size() == 0) throw Error(ErrorCode::EmptyGraph, "graph has no sensors");
  if (!cfg.fixed.empty()) return detail::checked_fixed(cfg.fixed, graph);
  const auto counts = apportion(cfg.size, cfg.mix);
  if (cfg.size == 0) return {};

  const auto routes = graph.gateway_routes();
  if (routes.empty()) {
    throw Error(ErrorCode::NoRoute, "no path joins two distinct entry/exit sensors");
  }
  if (cfg.spawn_window_ticks < 1) throw Error(ErrorCode::ConfigInvalid, "spawn window must be at least one tick");

  Rng pop = Rng::stream(seed, Stream::Population);
  Rng routing = Rng::stream(seed, Stream::Routing);

  std::vector<Activity> activities;
  activities.reserve(cfg.size);
  for (std::size_t i = 0; i < 3; ++i) activities.insert(activities.end(), counts[i], static_cast<Activity>(i));
  pop.shuffle(std::span<Activity>(activities));

  std::set<std::uint64_t> seen;
  std::vector<UserAgent> agents(cfg.size);
  for (std::size_t i = 0; i < cfg.size; ++i) {
    UserAgent& u = agents[i];
    u.true_id = static_cast<std::uint32_t>(i);
    const SpeedBand band = speed_band(activities[i]);
    u.attributes.speed = pop.uniform(band.lo, band.hi);
    u.attributes.set(Attribute::Activity, static_cast<std::uint8_t>(activities[i]));
    for (int attempt = 0;; ++attempt) {
      for (Attribute a : kCatalogOrder) {
        if (a == Attribute::Activity) continue;
        u.attributes.set(a, detail::draw_value(cfg.palettes[index_of(a)], pop));
      }
      if (!cfg.distinct_attributes || seen.insert(detail::appearance_key(u.attributes, catalog)).second) break;
      if (attempt > 10000) {
        throw Error(ErrorCode::ConfigInvalid, "cannot draw distinct appearances for this population size");
      }
    }
    u.spawn_tick = static_cast<Tick>(pop.index(static_cast<std::size_t>(cfg.spawn_window_ticks)));
    u.route = routes[routing.index(routes.size())];
  }
  return agents;
}

enum class Advance { Moving, Exited };

/// Moves an agent speed*dt meters along its route, rolling over leg ends.
inline Advance advance_user(UserAgent& agent, const ParkGraph& graph, double dt) {
  double remaining = agent.attributes.speed * dt;
  while (true) {
    const SensorId from = agent.route[agent.position.leg];
    const SensorId to = agent.route[agent.position.leg + 1];
    const double leg = *graph.edge_length(from, to);
    const double left_on_leg = (1.0 - agent.position.fraction) * leg;
    if (remaining < left_on_leg) {
      agent.position.fraction += remaining / leg;
      agent.distance_travelled += remaining;
      return Advance::Moving;
    }
    agent.distance_travelled += left_on_leg;
    remaining -= left_on_leg;
    if (agent.position.leg + 2 >= agent.route.size()) {
      agent.position.fraction = 1.0;
      return Advance::Exited;
    }
    ++agent.position.leg;
    agent.position.fraction = 0.0;
  }
}

inline Point locate(const UserAgent& agent, const ParkGraph& graph) {
  const Point a = graph.sensor(agent.route[agent.position.leg]).position;
  const Point b = graph.sensor(agent.route[agent.position.leg + 1]).position;
  const double f = agent.position.fraction;
  return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

/// Length of a route in meters.
inline double route_length(const std::vector<SensorId>& route, const ParkGraph& graph) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) total += *graph.edge_length(route[i], route[i + 1]);
  return total;
}

}  // namespace trailsim
