#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trailsim/attributes.hpp"
#include "trailsim/errors.hpp"

namespace trailsim {

using SensorId = std::uint32_t;

/// Planar coordinates in meters (x east, y north).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double edge_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct SensorSpec {
  SensorId id = 0;
  Point position;
  double range = 15.0;  // rho, meters
  AttributeMask capabilities = AttributeMask::all();
  bool always_on = false;  // entry/exit sensor
};

struct TrailEdge {
  SensorId a = 0;
  SensorId b = 0;
  double length = 0.0;
  bool exit = false;
};

/// Edge as written in a scenario; a missing length is taken from the coordinates.
struct EdgeSpec {
  SensorId a = 0;
  SensorId b = 0;
  std::optional<double> length;
  std::optional<bool> exit;
};

struct GraphSpec {
  std::vector<SensorSpec> sensors;
  std::vector<EdgeSpec> edges;
};

struct Neighbor {
  SensorId id;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

inline constexpr double kEdgeLengthTolerance = 1e-6;

/// Immutable park model: sensors at trail junctions joined by straight trail
/// segments. Always-on sensors are the park's entry/exit points.
class ParkGraph {
 public:
  std::span<const SensorSpec> sensors() const { return sensors_; }
  std::span<const TrailEdge> edges() const { return edges_; }
  std::size_t size() const { return sensors_.size(); }

  bool contains(SensorId id) const { return slot_.count(id) != 0; }

  std::size_t slot(SensorId id) const {
    auto it = slot_.find(id);
    if (it == slot_.end()) {
      throw Error(ErrorCode::UnknownSensor, "sensor " + std::to_string(id) + " is not in the graph");
    }
    return it->second;
  }

  const SensorSpec& sensor(SensorId id) const { return sensors_[slot(id)]; }

  /// Adjacent sensors with edge lengths, ordered by id.
  std::span<const Neighbor> neighbors(SensorId id) const { return adjacency_[slot(id)]; }

  std::size_t degree(SensorId id) const { return neighbors(id).size(); }

  std::optional<double> edge_length(SensorId a, SensorId b) const {
    for (const Neighbor& n : neighbors(a)) {
      if (n.id == b) return n.distance;
    }
    return std::nullopt;
  }

  std::vector<SensorId> gateways() const {
    std::vector<SensorId> out;
    for (const SensorSpec& s : sensors_) {
      if (s.always_on) out.push_back(s.id);
    }
    return out;
  }

  /// All simple paths between distinct entry/exit sensors, in a fixed order
  /// (origin, destination, then lexicographic).
  std::vector<std::vector<SensorId>> gateway_routes(std::size_t limit = 100000) const {
    std::vector<std::vector<SensorId>> routes;
    const auto ends = gateways();
    for (SensorId from : ends) {
      for (SensorId to : ends) {
        if (from == to) continue;
        std::vector<SensorId> path{from};
        std::vector<bool> seen(sensors_.size(), false);
        seen[slot(from)] = true;
        collect_paths(to, path, seen, routes, limit);
      }
    }
    return routes;
  }

  friend ParkGraph build_graph(const GraphSpec& spec, const AttributeMask& catalog);

 private:
  void collect_paths(SensorId to, std::vector<SensorId>& path, std::vector<bool>& seen,
                     std::vector<std::vector<SensorId>>& out, std::size_t limit) const {
    const SensorId here = path.back();
    if (here == to) {
      if (out.size() >= limit) {
        throw Error(ErrorCode::ConfigInvalid, "more than " + std::to_string(limit) + " entry/exit routes");
      }
      out.push_back(path);
      return;
    }
    for (const Neighbor& n : neighbors(here)) {
      const std::size_t s = slot(n.id);
      if (seen[s]) continue;
      seen[s] = true;
      path.push_back(n.id);
      collect_paths(to, path, seen, out, limit);
      path.pop_back();
      seen[s] = false;
    }
  }

  std::vector<SensorSpec> sensors_;
  std::vector<TrailEdge> edges_;
  std::map<SensorId, std::size_t> slot_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// Validates a scenario graph section. Sensors are stored in id order.
inline ParkGraph build_graph(const GraphSpec& spec, const AttributeMask& catalog = AttributeMask::all()) {
  ParkGraph g;
  g.sensors_ = spec.sensors;
  std::sort(g.sensors_.begin(), g.sensors_.end(),
            [](const SensorSpec& l, const SensorSpec& r) { return l.id < r.id; });
  if (g.sensors_.empty()) throw Error(ErrorCode::EmptyGraph, "graph has no sensors");

  for (std::size_t i = 0; i < g.sensors_.size(); ++i) {
    const SensorSpec& s = g.sensors_[i];
    if (!g.slot_.emplace(s.id, i).second) {
      throw Error(ErrorCode::DuplicateSensorId, "sensor id " + std::to_string(s.id) + " appears twice");
    }
    if (!(s.range > 0.0)) {
      throw Error(ErrorCode::ConfigInvalid, "sensor " + std::to_string(s.id) + " has non-positive range");
    }
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y)) {
      throw Error(ErrorCode::ConfigInvalid, "sensor " + std::to_string(s.id) + " has non-finite coordinates");
    }
    if (s.capabilities.empty() || !s.capabilities.subset_of(catalog)) {
      throw Error(ErrorCode::ConfigInvalid, "sensor " + std::to_string(s.id) +
                                                " capabilities must be a non-empty subset of the catalog");
    }
  }
  if (g.gateways().empty()) {
    throw Error(ErrorCode::NoEntryExitSensor, "no sensor is marked always_on");
  }

  g.adjacency_.assign(g.sensors_.size(), {});
  for (const EdgeSpec& e : spec.edges) {
    const std::string tag = "edge " + std::to_string(e.a) + "-" + std::to_string(e.b);
    if (!g.contains(e.a) || !g.contains(e.b)) throw Error(ErrorCode::UnknownSensor, tag + " references an unknown sensor");
    if (e.a == e.b) throw Error(ErrorCode::ConfigInvalid, tag + " is a self loop");
    const std::size_t sa = g.slot(e.a);
    const std::size_t sb = g.slot(e.b);
    for (const Neighbor& n : g.adjacency_[sa]) {
      if (n.id == e.b) throw Error(ErrorCode::ConfigInvalid, tag + " is duplicated");
    }
    const double euclid = edge_distance(g.sensors_[sa].position, g.sensors_[sb].position);
    const double length = e.length.value_or(euclid);
    if (!(length > 0.0)) throw Error(ErrorCode::ConfigInvalid, tag + " has non-positive length");
    if (std::abs(length - euclid) > kEdgeLengthTolerance) {
      throw Error(ErrorCode::EdgeDistanceMismatch,
                  tag + " length " + std::to_string(length) + " differs from coordinate distance " +
                      std::to_string(euclid));
    }
    const bool exit = e.exit.value_or(g.sensors_[sa].always_on || g.sensors_[sb].always_on);
    g.edges_.push_back({std::min(e.a, e.b), std::max(e.a, e.b), length, exit});
    g.adjacency_[sa].push_back({e.b, length});
    g.adjacency_[sb].push_back({e.a, length});
  }
  for (auto& adj : g.adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const Neighbor& l, const Neighbor& r) { return l.id < r.id; });
  }

  std::vector<bool> reached(g.sensors_.size(), false);
  std::vector<std::size_t> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (const Neighbor& n : g.adjacency_[s]) {
      const std::size_t t = g.slot(n.id);
      if (!reached[t]) {
        reached[t] = true;
        stack.push_back(t);
      }
    }
  }
  std::string unreached;
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (!reached[i]) unreached += (unreached.empty() ? "" : ",") + std::to_string(g.sensors_[i].id);
  }
  if (!unreached.empty()) {
    throw Error(ErrorCode::DisconnectedGraph, "sensors {" + unreached + "} are not reachable from sensor " +
                                                  std::to_string(g.sensors_[0].id));
  }
  return g;
}

}  // namespace trailsim
