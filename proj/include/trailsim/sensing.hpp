#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trailsim/attributes.hpp"
#include "trailsim/graph.hpp"
#include "trailsim/population.hpp"
#include "trailsim/rng.hpp"

namespace trailsim {

using ObsId = std::uint64_t;

/// One range visit of a user as recorded by a sensor. truth_id is carried
/// for scoring only; no matching code reads it.
struct Observation {
  ObsId obs_id = 0;
  SensorId sensor = 0;
  Tick a = 0;
  Tick depart_tick = -1;  // -1 while the user is still in range
  AttributeVector perceived;
  std::uint32_t truth_id = 0;

  bool finalized() const { return depart_tick >= 0; }
};

/// Perception error: independent categorical flips and a multiplicative
/// speed error drawn from [1 - speed_sigma, 1 + speed_sigma].
struct NoiseModel {
  std::array<double, kAttributeCount> flip{};
  double speed_sigma = 0.0;

  static NoiseModel uniform(double p_err, double sigma) {
    NoiseModel n;
    n.flip.fill(p_err);
    n.speed_sigma = sigma;
    return n;
  }

  void validate() const {
    for (Attribute a : kCatalogOrder) {
      const double p = flip[index_of(a)];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "flip probability for " + std::string(name_of(a)) + " outside [0,1]");
      }
    }
    if (!(speed_sigma >= 0.0 && speed_sigma <= 0.5)) {
      throw Error(ErrorCode::ConfigInvalid, "speed sigma outside [0,0.5]");
    }
  }
};

/// Applies perception noise. Activity is not flipped directly; it follows
/// the perturbed speed. Draw count is independent of the probabilities.
inline AttributeVector perturb(const AttributeVector& attrs, const NoiseModel& noise, Rng& rng) {
  AttributeVector out = attrs;
  for (Attribute a : kCatalogOrder) {
    if (a == Attribute::Activity) continue;
    const bool flip = rng.bernoulli(noise.flip[index_of(a)]);
    const std::size_t shift = 1 + rng.index(cardinality(a) - 1);
    if (flip && out.get(a)) {
      out.set(a, static_cast<std::uint8_t>((*out.get(a) + shift) % cardinality(a)));
    }
  }
  out.speed = attrs.speed * rng.uniform(1.0 - noise.speed_sigma, 1.0 + noise.speed_sigma);
  out.sync_activity();
  return out;
}

/// A user's whereabouts at one tick, as handed to sensors.
struct Sighting {
  std::uint32_t agent = 0;  // index into the population; seeds the world's noise
  Point where;
  const AttributeVector* truth = nullptr;
  bool exited = false;  // left the park this tick
  std::uint32_t truth_id = 0;
};

struct SenseEvents {
  std::vector<std::size_t> opened;  // indices into the observation log
  std::vector<std::size_t> closed;
};

/// Per-sensor range bookkeeping. A range visit yields at most one
/// observation, opened at the first awake tick of the visit; once opened the
/// sensor keeps capturing until the user departs.
class RangeTracker {
 public:
  bool capturing() const { return open_captures_ > 0; }

  /// Range visits that ended without being observed.
  std::size_t missed_visits() const { return missed_; }

  SenseEvents sense(const SensorSpec& sensor, bool awake, std::span<const Sighting> sightings, Tick tick,
                    const NoiseModel& noise, std::uint64_t seed, std::vector<Observation>& log) {
    SenseEvents events;
    for (const Sighting& s : sightings) {
      const bool in_range = !s.exited && edge_distance(s.where, sensor.position) < sensor.range;
      if (!in_range && visits_.empty()) continue;
      auto it = visits_.find(s.agent);
      if (in_range) {
        if (it == visits_.end()) {
          it = visits_.emplace(s.agent, Visit{next_ordinal_[s.agent]++, std::nullopt}).first;
        }
        if (!it->second.observation && awake) {
          Rng rng = Rng::stream(seed, Stream::Noise, sensor.id, s.agent, it->second.ordinal);
          Observation obs;
          obs.obs_id = log.size();
          obs.sensor = sensor.id;
          obs.a = tick;
          obs.perceived = perturb(*s.truth, noise, rng).restricted_to(sensor.capabilities);
          obs.truth_id = s.truth_id;
          it->second.observation = log.size();
          events.opened.push_back(log.size());
          log.push_back(obs);
          ++open_captures_;
        }
      } else if (it != visits_.end()) {
        if (it->second.observation) {
          log[*it->second.observation].depart_tick = tick;
          events.closed.push_back(*it->second.observation);
          --open_captures_;
        } else {
          ++missed_;
        }
        visits_.erase(it);
      }
    }
    return events;
  }

  /// Visits still open; used to finalize at the horizon.
  std::vector<std::size_t> open_observations() const {
    std::vector<std::size_t> out;
    for (const auto& [agent, v] : visits_) {
      if (v.observation) out.push_back(*v.observation);
    }
    return out;
  }

 private:
  struct Visit {
    std::uint32_t ordinal;
    std::optional<std::size_t> observation;
  };
  std::map<std::uint32_t, Visit> visits_;
  std::map<std::uint32_t, std::uint32_t> next_ordinal_;
  std::size_t open_captures_ = 0;
  std::size_t missed_ = 0;
};

}  // namespace trailsim
