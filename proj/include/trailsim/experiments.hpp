#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trailsim/engine.hpp"

namespace trailsim {

// ---- energy: always-on vs duty-cycle on identical seeds ----

struct SensorSaving {
  SensorId sensor = 0;
  bool always_on = false;
  Summary always_on_units;
  Summary duty_cycle_units;
  Summary saving;  // percent, over runs where always-on used any energy
};

struct EnergyComparison {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::vector<SensorSaving> sensors;
  Summary always_on_mean;  // mean units per sensor
  Summary duty_cycle_mean;
  Summary saving;          // per-run mean saving across sensors
  std::vector<std::optional<double>> per_run_saving;  // seed order
};

inline EnergyComparison compare_energy(const ScenarioConfig& cfg, std::size_t n, std::uint64_t base_seed,
                                       std::size_t jobs = 1) {
  if (n < 1) throw Error(ErrorCode::ConfigInvalid, "replications must be at least 1");
  ScenarioConfig on_cfg = cfg;
  on_cfg.mode = PowerMode::AlwaysOn;
  ScenarioConfig duty_cfg = cfg;
  duty_cfg.mode = PowerMode::DutyCycle;
  on_cfg.validate();

  struct Pair {
    std::optional<EnergyLedger> on;
    std::optional<EnergyLedger> duty;
  };
  std::vector<Pair> pairs(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    try {
      EnergyLedger on = run(on_cfg, base_seed + i).energy;
      EnergyLedger duty = run(duty_cfg, base_seed + i).energy;
      pairs[i] = {std::move(on), std::move(duty)};
    } catch (const Error&) {
      pairs[i] = {};
    }
  });

  EnergyComparison out;
  out.runs = n;
  std::map<SensorId, std::vector<double>> on_units, duty_units, saving;
  std::vector<double> on_mean, duty_mean, run_saving;
  for (const Pair& p : pairs) {
    if (!p.on || !p.duty) {
      ++out.failures;
      out.per_run_saving.push_back(std::nullopt);
      continue;
    }
    const SavingReport rep = saving_percent(*p.duty, *p.on);
    for (const SensorEnergy& e : p.on->sensors) on_units[e.sensor].push_back(static_cast<double>(e.units));
    for (const SensorEnergy& e : p.duty->sensors) duty_units[e.sensor].push_back(static_cast<double>(e.units));
    for (const auto& [id, pct] : rep.per_sensor) {
      if (pct) saving[id].push_back(*pct);
    }
    on_mean.push_back(p.on->mean_units());
    duty_mean.push_back(p.duty->mean_units());
    out.per_run_saving.push_back(rep.mean);
    if (rep.mean) run_saving.push_back(*rep.mean);
  }
  for (const SensorSpec& s : cfg.graph.sensors()) {
    out.sensors.push_back({s.id, s.always_on, summarize(on_units[s.id]), summarize(duty_units[s.id]),
                           summarize(saving[s.id])});
  }
  out.always_on_mean = summarize(on_mean);
  out.duty_cycle_mean = summarize(duty_mean);
  out.saving = summarize(run_saving);
  return out;
}

// ---- attribute-set sweeps ----

/// A comparison set: which attributes are matched and whether the ETA window
/// gates matches.
struct AttributeSet {
  std::string name;
  std::optional<AttributeMask> attributes;  // empty: the scenario's full set
  bool eta_gating = true;
};

/// Named sets: with-eta, no-eta (alias no-timestamp), all; anything else is a
/// comma-separated attribute list.
inline AttributeSet parse_attribute_set(const std::string& text) {
  if (text == "with-eta" || text == "all") return {text, std::nullopt, true};
  if (text == "no-eta" || text == "no-timestamp") return {text, std::nullopt, false};
  AttributeSet set{text, AttributeMask{}, true};
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, comma - start);
    if (item.empty()) throw Error(ErrorCode::UnknownAttribute, "empty attribute name in '" + text + "'");
    set.attributes->insert(parse_attribute(item));
    start = comma + 1;
  }
  return set;
}

inline ScenarioConfig with_set(ScenarioConfig cfg, const AttributeSet& set) {
  if (set.attributes) cfg.protocol.allowed = *set.attributes;
  cfg.protocol.match.eta_gating = set.eta_gating;
  return cfg;
}

struct SweepRow {
  AttributeSet set;
  Summary accuracy;
  std::size_t failures = 0;
};

/// Mean count accuracy per set over the same seeds, best first. Ties keep
/// the input order.
inline std::vector<SweepRow> sweep_attributes(const ScenarioConfig& cfg, const std::vector<AttributeSet>& sets,
                                              std::size_t n, std::uint64_t base_seed, std::size_t jobs = 1) {
  if (sets.empty()) throw Error(ErrorCode::ConfigInvalid, "no attribute sets to sweep");
  std::vector<SweepRow> rows;
  for (const AttributeSet& set : sets) {
    const Aggregate agg = replicate(with_set(cfg, set), n, base_seed, jobs);
    rows.push_back({set, agg.count_accuracy, agg.failures});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& l, const SweepRow& r) { return l.accuracy.mean > r.accuracy.mean; });
  return rows;
}

// ---- leave-one-out feature importance ----

struct ImportanceRow {
  Attribute attribute;
  double mean_drop = 0.0;
  std::size_t rank = 0;
};

struct Importance {
  Summary baseline;
  std::vector<ImportanceRow> rows;  // rank order
};

/// Drop in mean count accuracy when one attribute is withheld from matching.
/// Ranked by drop, largest first; ties by catalog order.
inline Importance feature_importance(const ScenarioConfig& cfg, std::size_t n, std::uint64_t base_seed,
                                     std::size_t jobs = 1) {
  const AttributeMask full = cfg.protocol.allowed ? (cfg.catalog & *cfg.protocol.allowed) : cfg.catalog;
  Importance out;
  ScenarioConfig base = cfg;
  base.protocol.allowed = full;
  out.baseline = replicate(base, n, base_seed, jobs).count_accuracy;
  for (Attribute a : full.members()) {
    ScenarioConfig without = base;
    AttributeMask m = full;
    m.erase(a);
    without.protocol.allowed = m;
    const Summary s = replicate(without, n, base_seed, jobs).count_accuracy;
    out.rows.push_back({a, out.baseline.mean - s.mean, 0});
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const ImportanceRow& l, const ImportanceRow& r) { return l.mean_drop > r.mean_drop; });
  for (std::size_t i = 0; i < out.rows.size(); ++i) out.rows[i].rank = i + 1;
  return out;
}

}  // namespace trailsim
