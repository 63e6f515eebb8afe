#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "trailsim/engine.hpp"
#include "trailsim/experiments.hpp"

namespace trailsim::csv {

/// Six significant digits, the fixed numeric format of every CSV.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Quotes a text field when it holds a delimiter.
inline std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string num(std::optional<double> v) { return v ? num(*v) : std::string(); }

inline const char* mode_name(PowerMode m) { return m == PowerMode::AlwaysOn ? "always-on" : "duty-cycle"; }

inline std::string value_name(const ScenarioConfig& cfg, Attribute a, std::optional<std::uint8_t> v) {
  if (!v) return {};
  const Palette& p = cfg.population.palettes[index_of(a)];
  return *v < p.values.size() ? p.values[*v] : std::to_string(*v);
}

inline void observations(std::ostream& out, const ScenarioConfig& cfg, const RunResult& r, bool emit_truth) {
  const auto attrs = cfg.catalog.members();
  out << "obs_id,sensor_id,a,depart_tick";
  for (Attribute a : attrs) out << ',' << name_of(a);
  out << ",speed";
  if (emit_truth) out << ",truth_id";
  out << '\n';
  for (const Observation& o : r.observations) {
    out << o.obs_id << ',' << o.sensor << ',' << o.a << ',' << o.depart_tick;
    for (Attribute a : attrs) out << ',' << value_name(cfg, a, o.perceived.get(a));
    out << ',' << num(o.perceived.speed);
    if (emit_truth) out << ',' << o.truth_id;
    out << '\n';
  }
}

inline void trails(std::ostream& out, const RunResult& r) {
  out << "user_id,hop_index,sensor_id,tick\n";
  for (const IdentityRecord& rec : r.registry.records()) {
    std::size_t hop = 0;
    for (const TrailHop& h : r.registry.trail(rec.id)) out << rec.id << ',' << hop++ << ',' << h.sensor << ',' << h.tick << '\n';
  }
}

inline void energy(std::ostream& out, const RunResult& r) {
  out << "sensor_id,mode,units\n";
  for (const SensorEnergy& e : r.energy.sensors) out << e.sensor << ',' << mode_name(r.energy.mode) << ',' << e.units << '\n';
}

inline void summary_header(std::ostream& out) {
  out << "scenario,seed,mode,unique_count,true_count,count_accuracy,falsely_new,wrongly_merged,"
         "trail_exact_fraction,mean_energy_units\n";
}

inline void summary_row(std::ostream& out, const std::string& scenario, std::uint64_t seed, PowerMode mode,
                        const std::optional<AccuracyReport>& acc, const EnergyLedger& energy) {
  out << field(scenario) << ',' << seed << ',' << mode_name(mode) << ',';
  if (acc) {
    out << acc->unique_count << ',' << acc->true_count << ',' << num(acc->count_accuracy) << ',' << acc->falsely_new
        << ',' << acc->wrongly_merged << ',' << num(acc->trail_exact_fraction);
  } else {
    out << ",0,,,,";
  }
  out << ',' << num(energy.mean_units()) << '\n';
}

inline const char* fate_name(MessageFate f) {
  switch (f) {
    case MessageFate::InFlight: return "in-flight";
    case MessageFate::Fulfilled: return "fulfilled";
    case MessageFate::Expired: return "expired";
    case MessageFate::Clamped: return "clamped";
  }
  return "?";
}

inline void messages(std::ostream& out, const RunResult& r) {
  out << "message_id,origin,target,obs_id,emitted,eta,window_lo,window_hi,speed,selected,fate\n";
  for (std::size_t i = 0; i < r.messages.size(); ++i) {
    const HandoffMessage& m = r.messages[i];
    out << m.id << ',' << m.origin << ',' << m.target << ',' << m.origin_obs_id << ',' << m.emitted << ',' << m.eta
        << ',' << m.window.lo << ',' << m.window.hi << ',' << num(m.speed) << ',';
    for (std::size_t k = 0; k < m.selected.size(); ++k) out << (k ? ";" : "") << name_of(m.selected[k].first);
    out << ',' << fate_name(r.fates[i]) << '\n';
  }
}

inline void replications(std::ostream& out, const std::string& scenario, PowerMode mode, const Aggregate& agg) {
  out << "scenario,seed,mode,unique_count,count_accuracy,falsely_new,wrongly_merged,trail_exact_fraction,"
         "mean_energy_units,error\n";
  for (const RunSummary& r : agg.per_run) {
    out << field(scenario) << ',' << r.seed << ',' << mode_name(mode) << ',';
    if (r.accuracy) {
      out << r.accuracy->unique_count << ',' << num(r.accuracy->count_accuracy) << ',' << r.accuracy->falsely_new << ','
          << r.accuracy->wrongly_merged << ',' << num(r.accuracy->trail_exact_fraction);
    } else {
      out << ",,,,";
    }
    out << ',' << (r.error ? std::string() : num(r.energy.mean_units())) << ',' << field(r.error.value_or("")) << '\n';
  }
}

inline void aggregate(std::ostream& out, const Aggregate& agg) {
  out << "metric,n,mean,std\n";
  out << "count_accuracy," << agg.count_accuracy.n << ',' << num(agg.count_accuracy.mean) << ','
      << num(agg.count_accuracy.stddev) << '\n';
  out << "unique_count," << agg.unique_count.n << ',' << num(agg.unique_count.mean) << ','
      << num(agg.unique_count.stddev) << '\n';
  for (const auto& [id, s] : agg.energy_units) {
    out << "energy_units_sensor_" << id << ',' << s.n << ',' << num(s.mean) << ',' << num(s.stddev) << '\n';
  }
  out << "failures," << agg.failures << ",,\n";
}

/// One row per sensor plus a mean row: average units in each mode and the
/// saving with its spread across replications.
inline void energy_comparison(std::ostream& out, const EnergyComparison& c) {
  out << "sensor,always_on_units,duty_cycle_units,saving_percent,saving_std\n";
  for (const SensorSaving& s : c.sensors) {
    out << s.sensor << ',' << num(s.always_on_units.mean) << ',' << num(s.duty_cycle_units.mean) << ','
        << num(s.saving.mean) << ',' << num(s.saving.stddev) << '\n';
  }
  out << "mean," << num(c.always_on_mean.mean) << ',' << num(c.duty_cycle_mean.mean) << ',' << num(c.saving.mean)
      << ',' << num(c.saving.stddev) << '\n';
}

inline std::string set_members(const AttributeSet& set, const AttributeMask& catalog) {
  const AttributeMask m = set.attributes ? *set.attributes : catalog;
  std::string s;
  for (Attribute a : m.members()) s += (s.empty() ? "" : ";") + std::string(name_of(a));
  return s;
}

inline void sweep(std::ostream& out, const std::vector<SweepRow>& rows, const AttributeMask& catalog) {
  out << "set,attributes,eta_gating,replications,mean_accuracy,std_accuracy\n";
  for (const SweepRow& r : rows) {
    out << field(r.set.name) << ',' << set_members(r.set, catalog) << ',' << (r.set.eta_gating ? "true" : "false") << ','
        << r.accuracy.n << ',' << num(r.accuracy.mean) << ',' << num(r.accuracy.stddev) << '\n';
  }
}

inline void importance(std::ostream& out, const Importance& imp) {
  out << "attribute,mean_drop,rank\n";
  for (const ImportanceRow& r : imp.rows) out << name_of(r.attribute) << ',' << num(r.mean_drop) << ',' << r.rank << '\n';
}

}  // namespace trailsim::csv
