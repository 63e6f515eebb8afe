#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "trailsim/identity.hpp"
#include "trailsim/population.hpp"
#include "trailsim/protocol.hpp"

namespace trailsim {

struct SensorEnergy {
  SensorId sensor;
  std::int64_t units;

  bool operator==(const SensorEnergy&) const = default;
};

/// Energy in wake windows: one unit per window of W ticks in which the
/// sensor was awake at least once.
struct EnergyLedger {
  PowerMode mode = PowerMode::DutyCycle;
  std::vector<SensorEnergy> sensors;

  std::int64_t units(SensorId id) const {
    for (const SensorEnergy& s : sensors) {
      if (s.sensor == id) return s.units;
    }
    throw Error(ErrorCode::UnknownSensor, "no energy entry for sensor " + std::to_string(id));
  }

  double mean_units() const {
    if (sensors.empty()) return 0.0;
    double total = 0.0;
    for (const SensorEnergy& s : sensors) total += static_cast<double>(s.units);
    return total / static_cast<double>(sensors.size());
  }

  bool operator==(const EnergyLedger&) const = default;
};

/// Charges each sensor for the W-tick windows it was awake in. Entry/exit
/// sensors, and every sensor in always-on mode, are charged from the window
/// holding the first observation of the run up to the horizon.
inline EnergyLedger meter(const WakeSchedule& schedule, Tick horizon, Tick window,
                          std::optional<Tick> first_observation) {
  if (window < 1) throw Error(ErrorCode::ConfigInvalid, "energy window must be at least one tick");
  EnergyLedger ledger;
  ledger.mode = schedule.mode();
  const Tick last_window = (horizon + window - 1) / window;  // exclusive
  for (SensorId id : schedule.sensor_ids()) {
    std::int64_t units = 0;
    if (first_observation) {
      const Tick full = std::max<Tick>(0, last_window - *first_observation / window);
      if (schedule.mode() == PowerMode::AlwaysOn || schedule.always_on(id)) {
        units = full;
      } else {
        Tick counted_upto = -1;  // last window index already charged
        for (const TickInterval& iv : schedule.intervals(id).intervals()) {
          const Tick first = std::max(iv.lo / window, counted_upto + 1);
          const Tick last = std::min(iv.hi / window, last_window - 1);
          if (last >= first) units += last - first + 1;
          counted_upto = std::max(counted_upto, last);
        }
      }
    }
    ledger.sensors.push_back({id, units});
  }
  return ledger;
}

struct SavingReport {
  std::vector<std::pair<SensorId, std::optional<double>>> per_sensor;  // empty when always-on used nothing
  std::optional<double> mean;
};

inline double saving_percent(double duty_units, double on_units) {
  if (on_units == 0.0) throw Error(ErrorCode::DivisionByZero, "always-on energy is zero; saving is undefined");
  return 100.0 * (1.0 - duty_units / on_units);
}

/// 100 * (1 - duty/on) per sensor and averaged over defined sensors.
/// Sensors whose always-on energy is zero are undefined and left out.
inline SavingReport saving_percent(const EnergyLedger& duty, const EnergyLedger& on) {
  SavingReport r;
  double total = 0.0;
  std::size_t defined = 0;
  for (const SensorEnergy& s : on.sensors) {
    std::optional<double> pct;
    try {
      pct = saving_percent(static_cast<double>(duty.units(s.sensor)), static_cast<double>(s.units));
      total += *pct;
      ++defined;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DivisionByZero) throw;
    }
    r.per_sensor.emplace_back(s.sensor, pct);
  }
  if (defined > 0) r.mean = total / static_cast<double>(defined);
  return r;
}

struct AccuracyReport {
  std::size_t unique_count = 0;
  std::size_t true_count = 0;
  double count_accuracy = 0.0;
  std::size_t falsely_new = 0;
  std::size_t wrongly_merged = 0;
  std::size_t correctly_linked = 0;
  std::size_t continuing = 0;  // observations that continue a ground-truth trail
  double trail_exact_fraction = 0.0;

  bool operator==(const AccuracyReport&) const = default;
};

/// Compares resolved identities with ground truth.
inline AccuracyReport score(const IdentityRegistry& registry, std::span<const Observation> observations,
                            std::span<const UserAgent> truth) {
  if (truth.empty()) throw Error(ErrorCode::ZeroTruth, "no ground-truth agents to score against");
  AccuracyReport r;
  r.unique_count = registry.unique_count();
  r.true_count = truth.size();
  const double rel = std::abs(static_cast<double>(r.unique_count) - static_cast<double>(r.true_count)) /
                     static_cast<double>(r.true_count);
  r.count_accuracy = std::max(0.0, 1.0 - rel);

  std::map<std::uint32_t, std::vector<const Observation*>> by_truth;
  std::map<ObsId, std::uint32_t> truth_of;
  for (const Observation& o : observations) {
    by_truth[o.truth_id].push_back(&o);
    truth_of[o.obs_id] = o.truth_id;
  }
  for (auto& [id, list] : by_truth) {
    std::sort(list.begin(), list.end(), [](const Observation* l, const Observation* r) {
      return l->a != r->a ? l->a < r->a : l->obs_id < r->obs_id;
    });
    for (std::size_t i = 1; i < list.size(); ++i) {
      ++r.continuing;
      const auto pred = registry.predecessor(list[i]->obs_id);
      if (!pred) {
        ++r.falsely_new;
      } else if (truth_of.at(*pred) == id) {
        ++r.correctly_linked;
      } else {
        ++r.wrongly_merged;
      }
    }
  }

  std::size_t exact = 0;
  for (const UserAgent& u : truth) {
    auto it = by_truth.find(u.true_id);
    if (it == by_truth.end()) continue;
    const auto user = registry.user_of(it->second.front()->obs_id);
    if (!user) continue;
    const auto trail = registry.trail(*user);
    if (trail.size() != u.route.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < trail.size() && same; ++i) same = trail[i].sensor == u.route[i];
    exact += same;
  }
  r.trail_exact_fraction = static_cast<double>(exact) / static_cast<double>(truth.size());
  return r;
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double total = 0.0;
  for (double x : xs) total += x;
  s.mean = total / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace trailsim
