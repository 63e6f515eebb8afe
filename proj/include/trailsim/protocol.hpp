#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "trailsim/attributes.hpp"
#include "trailsim/graph.hpp"
#include "trailsim/sensing.hpp"

namespace trailsim {

/// Shannon entropy in bits of the empirical value distribution.
template <std::ranges::input_range R>
double attribute_entropy(R&& values) {
  std::map<std::ranges::range_value_t<R>, std::size_t> counts;
  std::size_t n = 0;
  for (const auto& v : values) {
    ++counts[v];
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyInput, "entropy of an empty multiset");
  double h = 0.0;
  for (const auto& [value, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;  // -0.0 for a single value
}

enum class SelectionDirection { Lowest, Highest };

struct SelectionPolicy {
  std::size_t k = 5;
  SelectionDirection direction = SelectionDirection::Lowest;
  std::size_t history = 50;     // sliding window of recent observations
  std::size_t history_min = 10;  // below this, use the static order
};

/// Ranks the candidate attributes by entropy over the sensor's recent
/// observations and returns the first k. With too little history the static
/// catalog order is used.
inline std::vector<Attribute> select_attributes(std::span<const AttributeVector> history,
                                                const AttributeMask& candidates, std::size_t k,
                                                SelectionDirection direction = SelectionDirection::Lowest,
                                                std::size_t history_min = 1) {
  std::vector<Attribute> ranked = candidates.members();
  if (!history.empty() && history.size() >= history_min) {
    std::array<double, kAttributeCount> h{};
    std::vector<std::uint8_t> column;
    for (Attribute a : ranked) {
      column.clear();
      for (const AttributeVector& v : history) {
        if (auto x = v.get(a)) column.push_back(*x);
      }
      h[index_of(a)] = column.empty() ? 0.0 : attribute_entropy(column);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [&](Attribute l, Attribute r) {
      return direction == SelectionDirection::Lowest ? h[index_of(l)] < h[index_of(r)]
                                                     : h[index_of(l)] > h[index_of(r)];
    });
  }
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

/// Tick at which a user leaving at depart_tick covers d meters.
inline Tick estimate_arrival(double d, double speed, Tick depart_tick, double tick_seconds = 1.0) {
  if (!(speed > 0.0)) throw Error(ErrorCode::NonPositiveSpeed, "cannot estimate arrival at speed " + std::to_string(speed));
  return depart_tick + static_cast<Tick>(std::llround(d / (speed * tick_seconds)));
}

/// Closed tick interval.
struct TickInterval {
  Tick lo = 0;
  Tick hi = -1;

  bool empty() const { return hi < lo; }
  bool contains(Tick t) const { return lo <= t && t <= hi; }
  bool operator==(const TickInterval&) const = default;
};

/// Half-width w = max(min_half_width, ceil(fraction * travel_ticks)).
struct WindowPolicy {
  Tick min_half_width = 2;
  double fraction = 0.2;

  Tick half_width(Tick travel_ticks) const {
    const auto scaled = static_cast<Tick>(std::ceil(fraction * static_cast<double>(travel_ticks) - 1e-9));
    return std::max(min_half_width, scaled);
  }
};

struct HandoffMessage {
  std::uint64_t id = 0;  // emission order within a run
  SensorId origin = 0;
  ObsId origin_obs_id = 0;
  SensorId target = 0;
  std::vector<std::pair<Attribute, std::uint8_t>> selected;
  double speed = 0.0;
  Tick eta = 0;
  TickInterval window;
  Tick emitted = 0;
};

/// Meters between leaving one sensor's range and entering the neighbor's.
inline double range_gap(const SensorSpec& from, const SensorSpec& to, double edge_length) {
  return std::max(0.0, edge_length - from.range - to.range);
}

/// One message per neighbor of the observing sensor, carrying the selected
/// attributes, the perceived speed and the arrival window.
inline std::vector<HandoffMessage> make_handoffs(const Observation& obs, const ParkGraph& graph,
                                                 std::span<const Attribute> selection,
                                                 const WindowPolicy& policy, double tick_seconds = 1.0) {
  std::vector<HandoffMessage> out;
  const SensorSpec& origin = graph.sensor(obs.sensor);
  std::vector<std::pair<Attribute, std::uint8_t>> carried;
  for (Attribute a : selection) {
    if (auto v = obs.perceived.get(a)) carried.emplace_back(a, *v);
  }
  for (const Neighbor& n : graph.neighbors(obs.sensor)) {
    const double gap = range_gap(origin, graph.sensor(n.id), n.distance);
    const Tick eta = estimate_arrival(gap, obs.perceived.speed, obs.depart_tick, tick_seconds);
    const Tick w = policy.half_width(eta - obs.depart_tick);
    HandoffMessage m;
    m.origin = obs.sensor;
    m.origin_obs_id = obs.obs_id;
    m.target = n.id;
    m.selected = carried;
    m.speed = obs.perceived.speed;
    m.eta = eta;
    m.window = {eta - w, eta + w};
    m.emitted = obs.depart_tick;
    out.push_back(std::move(m));
  }
  return out;
}

/// Sorted, merged set of tick intervals.
class IntervalSet {
 public:
  void add(TickInterval iv) {
    if (iv.empty()) return;
    auto it = std::lower_bound(items_.begin(), items_.end(), iv.lo,
                               [](const TickInterval& x, Tick lo) { return x.hi + 1 < lo; });
    auto last = it;
    while (last != items_.end() && last->lo <= iv.hi + 1) {
      iv.lo = std::min(iv.lo, last->lo);
      iv.hi = std::max(iv.hi, last->hi);
      ++last;
    }
    it = items_.erase(it, last);
    items_.insert(it, iv);
  }

  bool contains(Tick t) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), t,
                               [](const TickInterval& x, Tick v) { return x.hi < v; });
    return it != items_.end() && it->lo <= t;
  }

  std::span<const TickInterval> intervals() const { return items_; }
  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<TickInterval> items_;
};

enum class PowerMode { AlwaysOn, DutyCycle };

/// Per-sensor wake intervals within [0, horizon). Entry/exit sensors are
/// awake throughout regardless of their interval set.
class WakeSchedule {
 public:
  WakeSchedule() = default;
  WakeSchedule(const ParkGraph& graph, PowerMode mode, Tick horizon)
      : mode_(mode), horizon_(horizon), always_on_(graph.size()), sets_(graph.size()) {
    for (std::size_t i = 0; i < graph.size(); ++i) {
      always_on_[i] = graph.sensors()[i].always_on;
      slot_[graph.sensors()[i].id] = i;
    }
  }

  PowerMode mode() const { return mode_; }
  Tick horizon() const { return horizon_; }

  /// Adds a wake interval, clamped to the horizon. No-op in always-on mode.
  void wake(SensorId sensor, TickInterval iv) {
    if (mode_ == PowerMode::AlwaysOn) return;
    iv.lo = std::max<Tick>(iv.lo, 0);
    iv.hi = std::min<Tick>(iv.hi, horizon_ - 1);
    sets_[slot_.at(sensor)].add(iv);
  }

  bool awake(SensorId sensor, Tick t) const {
    if (mode_ == PowerMode::AlwaysOn) return true;
    const std::size_t s = slot_.at(sensor);
    return always_on_[s] || sets_[s].contains(t);
  }

  bool always_on(SensorId sensor) const { return always_on_[slot_.at(sensor)]; }
  const IntervalSet& intervals(SensorId sensor) const { return sets_[slot_.at(sensor)]; }

  std::vector<SensorId> sensor_ids() const {
    std::vector<SensorId> ids;
    for (const auto& [id, s] : slot_) ids.push_back(id);
    return ids;
  }

  bool operator==(const WakeSchedule&) const = default;

 private:
  PowerMode mode_ = PowerMode::DutyCycle;
  Tick horizon_ = 0;
  std::vector<bool> always_on_;
  std::vector<IntervalSet> sets_;
  std::map<SensorId, std::size_t> slot_;
};

/// Opens the message's arrival window at its target sensor.
inline WakeSchedule schedule_wake(WakeSchedule schedule, const HandoffMessage& msg) {
  schedule.wake(msg.target, msg.window);
  return schedule;
}

/// Recent perceived vectors at one sensor, capped at the policy's history size.
class SensorHistory {
 public:
  explicit SensorHistory(std::size_t capacity = 50) : capacity_(capacity) {}

  void push(const AttributeVector& v) {
    items_.push_back(v);
    if (items_.size() > capacity_) items_.erase(items_.begin());
  }

  std::span<const AttributeVector> items() const { return items_; }

 private:
  std::size_t capacity_;
  std::vector<AttributeVector> items_;
};

}  // namespace trailsim
