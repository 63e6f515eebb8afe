// trailsim: command-line front end for the trail sensor network simulator.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trailsim/csv.hpp"
#include "trailsim/experiments.hpp"
#include "trailsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace trailsim;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::size_t replications = 100;
  std::string mode;
  std::vector<std::string> attributes;
  std::string out = ".";
  std::size_t jobs = default_jobs();
  bool emit_truth = false;
  bool verbose = false;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("TRAILSIM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw UsageError(std::string("TRAILSIM_SEED is not an integer: ") + env);
    return v;
  }
  return 1;
}

ScenarioConfig load(const Options& o) {
  ScenarioConfig cfg = load_scenario(o.scenario);
  if (o.mode == "always-on") {
    cfg.mode = PowerMode::AlwaysOn;
  } else if (o.mode == "duty-cycle") {
    cfg.mode = PowerMode::DutyCycle;
  }
  return cfg;
}

/// run/replicate take at most one attribute set.
ScenarioConfig apply_single_set(ScenarioConfig cfg, const Options& o) {
  if (o.attributes.size() > 1) throw UsageError("this command takes a single --attributes set");
  if (!o.attributes.empty()) cfg = with_set(cfg, parse_attribute_set(o.attributes.front()));
  return cfg;
}

fs::path out_dir(const Options& o) {
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
  return dir;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  fn(f);
  if (!f) throw Error(ErrorCode::ConfigInvalid, "write failed for " + path.string());
}

void require_replications(const Options& o) {
  if (o.replications < 1) throw UsageError("--replications must be at least 1");
}

int cmd_run(const Options& o) {
  const ScenarioConfig cfg = apply_single_set(load(o), o);
  const std::uint64_t seed = resolve_seed(o);
  const fs::path dir = out_dir(o);
  const RunResult r = run(cfg, seed);
  write_file(dir / "observations.csv", [&](std::ostream& f) { csv::observations(f, cfg, r, o.emit_truth); });
  write_file(dir / "trails.csv", [&](std::ostream& f) { csv::trails(f, r); });
  write_file(dir / "energy.csv", [&](std::ostream& f) { csv::energy(f, r); });
  write_file(dir / "summary.csv", [&](std::ostream& f) {
    csv::summary_header(f);
    csv::summary_row(f, cfg.name, seed, cfg.mode, r.accuracy, r.energy);
  });
  write_file(dir / "messages.csv", [&](std::ostream& f) { csv::messages(f, r); });

  std::printf("unique_count %zu\n", r.registry.unique_count());
  std::printf("count_accuracy %s\n", r.accuracy ? csv::num(r.accuracy->count_accuracy).c_str() : "undefined");
  if (o.verbose) {
    std::fprintf(stderr, "horizon %lld ticks, %zu observations, %zu range visits missed while asleep\n",
                 static_cast<long long>(r.horizon), r.observations.size(), r.missed_visits);
    std::fprintf(stderr, "messages: %zu emitted, %zu fulfilled, %zu expired, %zu clamped\n", r.tally.emitted,
                 r.tally.fulfilled, r.tally.expired, r.tally.clamped);
  }
  return 0;
}

int cmd_replicate(const Options& o) {
  require_replications(o);
  const ScenarioConfig cfg = apply_single_set(load(o), o);
  const fs::path dir = out_dir(o);
  const Aggregate agg = replicate(cfg, o.replications, resolve_seed(o), o.jobs);
  write_file(dir / "replications.csv", [&](std::ostream& f) { csv::replications(f, cfg.name, cfg.mode, agg); });
  write_file(dir / "aggregate.csv", [&](std::ostream& f) { csv::aggregate(f, agg); });
  std::printf("runs %zu failures %zu\n", agg.runs, agg.failures);
  std::printf("count_accuracy mean %s std %s\n", csv::num(agg.count_accuracy.mean).c_str(),
              csv::num(agg.count_accuracy.stddev).c_str());
  if (o.verbose) {
    for (const RunSummary& r : agg.per_run) {
      if (r.error) std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(r.seed), r.error->c_str());
    }
  }
  return 0;
}

int cmd_compare_energy(const Options& o) {
  require_replications(o);
  const ScenarioConfig cfg = load(o);
  const fs::path dir = out_dir(o);
  const EnergyComparison c = compare_energy(cfg, o.replications, resolve_seed(o), o.jobs);
  write_file(dir / "energy_comparison.csv", [&](std::ostream& f) { csv::energy_comparison(f, c); });
  std::printf("%-8s %12s %12s %10s %8s\n", "sensor", "always-on", "duty-cycle", "saving%", "std");
  for (const SensorSaving& s : c.sensors) {
    std::printf("%-8u %12.1f %12.1f %10.1f %8.2f\n", s.sensor, s.always_on_units.mean, s.duty_cycle_units.mean,
                s.saving.mean, s.saving.stddev);
  }
  std::printf("%-8s %12.1f %12.1f %10.1f %8.2f\n", "mean", c.always_on_mean.mean, c.duty_cycle_mean.mean,
              c.saving.mean, c.saving.stddev);
  if (c.failures > 0) std::fprintf(stderr, "%zu of %zu replications failed\n", c.failures, c.runs);
  return 0;
}

int cmd_sweep(const Options& o) {
  require_replications(o);
  if (o.attributes.empty()) throw UsageError("sweep-attributes needs at least one --attributes set");
  std::vector<AttributeSet> sets;
  for (const std::string& s : o.attributes) sets.push_back(parse_attribute_set(s));
  const ScenarioConfig cfg = load(o);
  const fs::path dir = out_dir(o);
  const auto rows = sweep_attributes(cfg, sets, o.replications, resolve_seed(o), o.jobs);
  write_file(dir / "sweep.csv", [&](std::ostream& f) { csv::sweep(f, rows, cfg.catalog); });
  for (const SweepRow& r : rows) {
    std::printf("%-32s %8.4f +- %.4f\n", r.set.name.c_str(), r.accuracy.mean, r.accuracy.stddev);
  }
  return 0;
}

int cmd_rank(const Options& o) {
  require_replications(o);
  if (o.replications < 30) std::fprintf(stderr, "warning: fewer than 30 replications give unstable means\n");
  const ScenarioConfig cfg = apply_single_set(load(o), o);
  const fs::path dir = out_dir(o);
  const Importance imp = feature_importance(cfg, o.replications, resolve_seed(o), o.jobs);
  write_file(dir / "importance.csv", [&](std::ostream& f) { csv::importance(f, imp); });

  double widest = 0.0;
  for (const ImportanceRow& r : imp.rows) widest = std::max(widest, std::abs(r.mean_drop));
  std::printf("baseline accuracy %.4f\n", imp.baseline.mean);
  for (const ImportanceRow& r : imp.rows) {
    const int len = widest > 0.0 ? static_cast<int>(std::lround(30.0 * std::abs(r.mean_drop) / widest)) : 0;
    std::printf("%2zu  %-13s %+9.4f  %s\n", r.rank, std::string(name_of(r.attribute)).c_str(), r.mean_drop,
                std::string(static_cast<std::size_t>(len), r.mean_drop < 0.0 ? '-' : '#').c_str());
  }
  return 0;
}

void add_common(CLI::App* sub, Options& o, bool with_mode, bool with_attributes) {
  sub->add_option("--scenario", o.scenario, "scenario file")->required();
  sub->add_option("--seed", o.seed, "seed (first seed for batches); falls back to TRAILSIM_SEED");
  sub->add_option("--out", o.out, "output directory");
  sub->add_flag("-v,--verbose", o.verbose, "extra diagnostics on stderr");
  if (with_mode) sub->add_option("--mode", o.mode, "power mode")->check(CLI::IsMember({"always-on", "duty-cycle"}));
  if (with_attributes) {
    sub->add_option("--attributes", o.attributes,
                    "attribute set: with-eta, no-eta, no-timestamp, all, or a comma-separated list");
  }
}

void add_batch(CLI::App* sub, Options& o) {
  sub->add_option("--replications", o.replications, "number of seeded runs");
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trail sensor network simulator: unique-user counting and energy accounting"};
  app.require_subcommand(1);
  Options o;

  auto* run_cmd = app.add_subcommand("run", "one seeded run; writes per-run CSVs");
  add_common(run_cmd, o, true, true);
  run_cmd->add_flag("--emit-truth", o.emit_truth, "add the ground-truth column to observations.csv");

  auto* rep_cmd = app.add_subcommand("replicate", "seeded replications with aggregate statistics");
  add_common(rep_cmd, o, true, true);
  add_batch(rep_cmd, o);

  auto* energy_cmd = app.add_subcommand("compare-energy", "always-on vs duty-cycle energy per sensor");
  add_common(energy_cmd, o, false, false);
  add_batch(energy_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep-attributes", "count accuracy per attribute set");
  add_common(sweep_cmd, o, true, true);
  add_batch(sweep_cmd, o);

  auto* rank_cmd = app.add_subcommand("rank-features", "leave-one-out attribute importance");
  add_common(rank_cmd, o, true, true);
  add_batch(rank_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd) return cmd_run(o);
    if (*rep_cmd) return cmd_replicate(o);
    if (*energy_cmd) return cmd_compare_energy(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*rank_cmd) return cmd_rank(o);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "trailsim: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "trailsim: %s\n", e.what());
    return is_config_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trailsim: %s\n", e.what());
    return 2;
  }
  return 1;
}
