#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trailsim/graph.hpp"
#include "trailsim/identity.hpp"
#include "trailsim/metrics.hpp"
#include "trailsim/parallel.hpp"
#include "trailsim/population.hpp"
#include "trailsim/protocol.hpp"
#include "trailsim/sensing.hpp"

namespace trailsim {

struct ProtocolConfig {
  SelectionPolicy selection;
  WindowPolicy window;
  MatchTolerance match;
  /// Restricts which attributes may be selected for comparison.
  std::optional<AttributeMask> allowed;
  /// A handoff may only extend an identity whose latest hop is its origin,
  /// so every trail stays a simple chain.
  bool single_successor = true;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double tick_seconds = 1.0;
  std::optional<Tick> horizon_ticks;  // default: spawn window + 3x slowest longest route
  PowerMode mode = PowerMode::DutyCycle;
  AttributeMask catalog = AttributeMask::all();
  ParkGraph graph;
  PopulationConfig population;
  NoiseModel noise;
  ProtocolConfig protocol;
  Tick energy_window = 10;

  Tick horizon() const {
    if (horizon_ticks) return *horizon_ticks;
    double longest = 0.0;
    for (const auto& r : graph.gateway_routes()) longest = std::max(longest, route_length(r, graph));
    const double slowest = speed_band(Activity::Walk).lo;
    Tick spawn = population.spawn_window_ticks;
    for (const UserAgent& u : population.fixed) spawn = std::max(spawn, u.spawn_tick + 1);
    return spawn + static_cast<Tick>(std::ceil(3.0 * longest / (slowest * tick_seconds)));
  }

  /// Attributes eligible for comparison at a sensor.
  AttributeMask comparable(const SensorSpec& sensor) const {
    AttributeMask m = sensor.capabilities & catalog;
    if (protocol.allowed) m = m & *protocol.allowed;
    return m;
  }

  void validate() const {
    if (!(tick_seconds > 0.0)) throw Error(ErrorCode::ConfigInvalid, "tick_seconds must be positive");
    if (energy_window < 1) throw Error(ErrorCode::ConfigInvalid, "energy window must be at least one tick");
    if (protocol.selection.k < 1) throw Error(ErrorCode::ConfigInvalid, "selection k must be at least 1");
    if (protocol.window.min_half_width < 0 || protocol.window.fraction < 0.0) {
      throw Error(ErrorCode::ConfigInvalid, "window policy must be non-negative");
    }
    if (protocol.match.speed_rel < 0.0) throw Error(ErrorCode::ConfigInvalid, "speed tolerance must be non-negative");
    noise.validate();
    const double fastest = speed_band(Activity::Bike).hi * (1.0 + noise.speed_sigma) * tick_seconds;
    for (const SensorSpec& s : graph.sensors()) {
      if (s.range <= fastest) {
        throw Error(ErrorCode::ConfigInvalid, "sensor " + std::to_string(s.id) + " range " + std::to_string(s.range) +
                                                  " m is shorter than one tick of the fastest user");
      }
    }
    if (horizon() < 1) throw Error(ErrorCode::ConfigInvalid, "horizon must be at least one tick");
  }
};

struct MessageTally {
  std::size_t emitted = 0;
  std::size_t fulfilled = 0;
  std::size_t expired = 0;
  std::size_t clamped = 0;

  bool operator==(const MessageTally&) const = default;
};

struct RunResult {
  std::uint64_t seed = 0;
  PowerMode mode = PowerMode::DutyCycle;
  Tick horizon = 0;
  std::vector<UserAgent> agents;
  std::vector<Observation> observations;
  IdentityRegistry registry;
  std::vector<HandoffMessage> messages;
  std::vector<MessageFate> fates;
  WakeSchedule schedule;
  EnergyLedger energy;
  std::optional<AccuracyReport> accuracy;
  std::optional<Tick> first_observation;
  MessageTally tally;
  std::size_t missed_visits = 0;  // range visits that slept through
};

/// One deterministic simulation. Each tick runs, in order: movement, message
/// delivery, wake-state update, sensing, handoff emission with wake
/// scheduling, and registry ingestion. Agents, sensors and observations are
/// always visited in ascending id order.
inline RunResult run(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const ParkGraph& graph = cfg.graph;
  const Tick horizon = cfg.horizon();
  const ProtocolConfig& proto = cfg.protocol;

  RunResult out;
  out.seed = seed;
  out.mode = cfg.mode;
  out.horizon = horizon;
  out.agents = sample_population(cfg.population, graph, seed, cfg.catalog);
  out.schedule = WakeSchedule(graph, cfg.mode, horizon);

  std::vector<UserAgent>& agents = out.agents;
  std::vector<std::size_t> by_spawn(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) by_spawn[i] = i;
  std::stable_sort(by_spawn.begin(), by_spawn.end(),
                   [&](std::size_t l, std::size_t r) { return agents[l].spawn_tick < agents[r].spawn_tick; });
  std::size_t next_spawn = 0;

  PendingBoard board(graph, proto.match.eta_gating);
  std::vector<RangeTracker> trackers(graph.size());
  std::vector<SensorHistory> history(graph.size(), SensorHistory(proto.selection.history));
  std::vector<bool> awake(graph.size());
  std::vector<std::size_t> active;  // agent indices, ascending
  std::vector<Sighting> sightings;
  std::vector<std::size_t> opened;
  std::vector<std::size_t> closed;
  std::size_t finished = 0;

  for (Tick t = 0; t < horizon; ++t) {
    // 1. movement
    sightings.clear();
    std::vector<std::size_t> still;
    for (std::size_t i : active) {
      if (advance_user(agents[i], graph, cfg.tick_seconds) == Advance::Exited) {
        sightings.push_back({static_cast<std::uint32_t>(i), {}, &agents[i].attributes, true, agents[i].true_id});
        ++finished;
      } else {
        still.push_back(i);
      }
    }
    bool spawned = false;
    while (next_spawn < by_spawn.size() && agents[by_spawn[next_spawn]].spawn_tick == t) {
      still.push_back(by_spawn[next_spawn++]);
      spawned = true;
    }
    if (spawned) std::sort(still.begin(), still.end());
    active.swap(still);
    for (std::size_t i : active) {
      sightings.push_back(
          {static_cast<std::uint32_t>(i), locate(agents[i], graph), &agents[i].attributes, false, agents[i].true_id});
    }
    std::sort(sightings.begin(), sightings.end(),
              [](const Sighting& l, const Sighting& r) { return l.agent < r.agent; });

    // 2. delivery
    board.advance(t);

    // 3. wake state
    for (std::size_t s = 0; s < graph.size(); ++s) {
      awake[s] = out.schedule.awake(graph.sensors()[s].id, t) || trackers[s].capturing();
    }

    // 4. sensing
    opened.clear();
    closed.clear();
    if (!sightings.empty()) {
      for (std::size_t s = 0; s < graph.size(); ++s) {
        SenseEvents ev = trackers[s].sense(graph.sensors()[s], awake[s], sightings, t, cfg.noise, seed, out.observations);
        opened.insert(opened.end(), ev.opened.begin(), ev.opened.end());
        closed.insert(closed.end(), ev.closed.begin(), ev.closed.end());
      }
    }
    std::sort(opened.begin(), opened.end());
    std::sort(closed.begin(), closed.end());

    // 5. handoff emission and wake scheduling
    for (std::size_t idx : closed) {
      const Observation& obs = out.observations[idx];
      const SensorSpec& sensor = graph.sensor(obs.sensor);
      const std::size_t slot = graph.slot(obs.sensor);
      const auto selection = select_attributes(history[slot].items(), cfg.comparable(sensor), proto.selection.k,
                                               proto.selection.direction, proto.selection.history_min);
      for (HandoffMessage& m : make_handoffs(obs, graph, selection, proto.window, cfg.tick_seconds)) {
        out.schedule.wake(m.target, m.window);
        board.post(std::move(m));
      }
      out.schedule.wake(obs.sensor, {obs.a, obs.depart_tick});
    }

    // 6. registry ingestion
    for (std::size_t idx : opened) {
      const Observation& obs = out.observations[idx];
      const std::size_t slot = graph.slot(obs.sensor);
      history[slot].push(obs.perceived);
      const MatchDecision decision = match_observation(obs, board.at(obs.sensor), proto.match);
      out.registry.ingest(obs, decision);
      if (decision.same_user()) {
        board.fulfilled(decision.matched_message->id);
        if (proto.single_successor) {
          board.supersede(*decision.origin_obs_id, graph, decision.matched_message->origin);
        }
      }
    }
  }

  const std::size_t unfinished = agents.size() - finished;
  if (unfinished > 0) {
    throw Error(ErrorCode::HorizonTooShort,
                std::to_string(unfinished) + " agents still in the park at horizon " + std::to_string(horizon));
  }
  board.close();
  out.messages.assign(board.messages().begin(), board.messages().end());
  out.fates.assign(board.fates().begin(), board.fates().end());
  out.tally = {out.messages.size(), board.count(MessageFate::Fulfilled), board.count(MessageFate::Expired),
               board.count(MessageFate::Clamped)};
  for (const RangeTracker& tr : trackers) out.missed_visits += tr.missed_visits();
  for (const Observation& o : out.observations) {
    if (!out.first_observation || o.a < *out.first_observation) out.first_observation = o.a;
  }
  out.energy = meter(out.schedule, horizon, cfg.energy_window, out.first_observation);
  if (!agents.empty()) out.accuracy = score(out.registry, out.observations, agents);
  return out;
}

/// Per-run figures kept by replicate().
struct RunSummary {
  std::uint64_t seed = 0;
  std::optional<AccuracyReport> accuracy;
  EnergyLedger energy;
  std::optional<std::string> error;
};

struct Aggregate {
  std::size_t runs = 0;
  std::size_t failures = 0;
  Summary count_accuracy;
  Summary unique_count;
  std::vector<std::pair<SensorId, Summary>> energy_units;
  std::vector<RunSummary> per_run;  // seed order
};

inline Aggregate aggregate(std::vector<RunSummary> rows) {
  Aggregate agg;
  agg.runs = rows.size();
  std::vector<double> acc;
  std::vector<double> uniq;
  std::map<SensorId, std::vector<double>> units;
  for (const RunSummary& r : rows) {
    if (r.error) {
      ++agg.failures;
      continue;
    }
    if (r.accuracy) {
      acc.push_back(r.accuracy->count_accuracy);
      uniq.push_back(static_cast<double>(r.accuracy->unique_count));
    }
    for (const SensorEnergy& e : r.energy.sensors) units[e.sensor].push_back(static_cast<double>(e.units));
  }
  agg.count_accuracy = summarize(acc);
  agg.unique_count = summarize(uniq);
  for (const auto& [id, xs] : units) agg.energy_units.emplace_back(id, summarize(xs));
  agg.per_run = std::move(rows);
  return agg;
}

/// Runs seeds base_seed .. base_seed+n-1, possibly in parallel, and merges
/// in seed order. Per-run failures are collected, not fatal.
inline Aggregate replicate(const ScenarioConfig& cfg, std::size_t n, std::uint64_t base_seed,
                           std::size_t jobs = 1) {
  if (n < 1) throw Error(ErrorCode::ConfigInvalid, "replications must be at least 1");
  cfg.validate();
  std::vector<RunSummary> rows(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    RunSummary& row = rows[i];
    row.seed = base_seed + i;
    try {
      RunResult r = run(cfg, row.seed);
      row.accuracy = r.accuracy;
      row.energy = std::move(r.energy);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return aggregate(std::move(rows));
}

}  // namespace trailsim
