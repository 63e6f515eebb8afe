#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "trailsim/engine.hpp"

namespace trailsim {

namespace detail {

class ScenarioReader {
 public:
  explicit ScenarioReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    std::string where = source_;
    if (at.IsDefined() && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
    throw Error(ErrorCode::ConfigInvalid, where + ": " + what);
  }

  void only_keys(const YAML::Node& map, std::initializer_list<const char*> keys) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!known.count(key)) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  template <class T>
  T get(const YAML::Node& map, const char* key, T fallback) const {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    return as<T>(n, key);
  }

  template <class T>
  T require(const YAML::Node& map, const char* key) const {
    const YAML::Node n = map[key];
    if (!n) fail(map, std::string("missing required key '") + key + "'");
    return as<T>(n, key);
  }

  template <class T>
  T as(const YAML::Node& n, const char* what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, std::string("bad value for '") + what + "'");
    }
  }

  Attribute attribute(const YAML::Node& n) const {
    try {
      return parse_attribute(as<std::string>(n, "attribute"));
    } catch (const Error& e) {
      fail(n, e.what());
    }
  }

  AttributeMask attribute_list(const YAML::Node& n) const {
    if (!n.IsSequence()) fail(n, "expected a list of attribute names");
    AttributeMask m;
    for (const auto& item : n) m.insert(attribute(item));
    return m;
  }

  ScenarioConfig read(const YAML::Node& root) const {
    only_keys(root, {"version", "name", "tick_seconds", "horizon_ticks", "mode", "attributes", "energy", "graph",
                     "population", "noise", "protocol"});
    if (require<int>(root, "version") != 1) fail(root["version"], "unsupported scenario version");
    ScenarioConfig cfg;
    cfg.name = get<std::string>(root, "name", "scenario");
    cfg.tick_seconds = get<double>(root, "tick_seconds", 1.0);
    if (root["horizon_ticks"]) cfg.horizon_ticks = as<Tick>(root["horizon_ticks"], "horizon_ticks");
    if (root["mode"]) cfg.mode = mode(root["mode"]);
    if (root["attributes"]) cfg.catalog = attribute_list(root["attributes"]);
    if (const YAML::Node e = root["energy"]) {
      only_keys(e, {"window_ticks"});
      cfg.energy_window = get<Tick>(e, "window_ticks", 10);
    }
    if (!root["graph"]) fail(root, "missing required key 'graph'");
    cfg.graph = graph(root["graph"], cfg.catalog);
    if (const YAML::Node p = root["population"]) cfg.population = population(p);
    if (const YAML::Node n = root["noise"]) cfg.noise = noise(n);
    if (const YAML::Node p = root["protocol"]) cfg.protocol = protocol(p);
    try {
      cfg.validate();
    } catch (const Error& e) {
      fail(root, e.what());
    }
    return cfg;
  }

  PowerMode mode(const YAML::Node& n) const {
    const auto text = as<std::string>(n, "mode");
    if (text == "duty-cycle" || text == "duty_cycle") return PowerMode::DutyCycle;
    if (text == "always-on" || text == "always_on") return PowerMode::AlwaysOn;
    fail(n, "mode must be duty-cycle or always-on");
  }

  ParkGraph graph(const YAML::Node& g, const AttributeMask& catalog) const {
    only_keys(g, {"sensors", "edges"});
    GraphSpec spec;
    const YAML::Node sensors = g["sensors"];
    if (!sensors || !sensors.IsSequence()) fail(g, "graph.sensors must be a list");
    for (const auto& s : sensors) {
      only_keys(s, {"id", "x", "y", "rho", "always_on", "capabilities"});
      SensorSpec spec_s;
      spec_s.id = require<SensorId>(s, "id");
      spec_s.position = {require<double>(s, "x"), require<double>(s, "y")};
      spec_s.range = get<double>(s, "rho", 15.0);
      spec_s.always_on = get<bool>(s, "always_on", false);
      spec_s.capabilities = s["capabilities"] ? attribute_list(s["capabilities"]) : catalog;
      spec.sensors.push_back(spec_s);
    }
    const YAML::Node edges = g["edges"];
    if (edges && !edges.IsSequence()) fail(edges, "graph.edges must be a list");
    if (edges) {
      for (const auto& e : edges) {
        only_keys(e, {"a", "b", "d", "exit"});
        EdgeSpec es;
        es.a = require<SensorId>(e, "a");
        es.b = require<SensorId>(e, "b");
        if (e["d"]) es.length = as<double>(e["d"], "d");
        if (e["exit"]) es.exit = as<bool>(e["exit"], "exit");
        spec.edges.push_back(es);
      }
    }
    try {
      return build_graph(spec, catalog);
    } catch (const Error& e) {
      fail(g, e.what());
    }
  }

  PopulationConfig population(const YAML::Node& p) const {
    only_keys(p, {"size", "activity_mix", "spawn_window_ticks", "distinct_attributes", "palettes", "agents"});
    PopulationConfig cfg;
    cfg.size = get<std::size_t>(p, "size", cfg.size);
    cfg.spawn_window_ticks = get<Tick>(p, "spawn_window_ticks", cfg.spawn_window_ticks);
    cfg.distinct_attributes = get<bool>(p, "distinct_attributes", false);
    if (const YAML::Node mix = p["activity_mix"]) {
      only_keys(mix, {"walk", "jog", "bike"});
      cfg.mix = {require<double>(mix, "walk"), require<double>(mix, "jog"), require<double>(mix, "bike")};
    }
    if (const YAML::Node pal = p["palettes"]) {
      if (!pal.IsMap()) fail(pal, "palettes must be a mapping");
      for (const auto& kv : pal) {
        const Attribute a = attribute(kv.first);
        only_keys(kv.second, {"values", "weights"});
        Palette palette;
        palette.values = require<std::vector<std::string>>(kv.second, "values");
        palette.weights = get<std::vector<double>>(kv.second, "weights", {});
        if (palette.values.size() != cardinality(a)) {
          fail(kv.second, std::string(name_of(a)) + " palette needs " + std::to_string(cardinality(a)) + " values");
        }
        if (!palette.weights.empty()) {
          double total = 0.0;
          for (double w : palette.weights) {
            if (!(w >= 0.0)) fail(kv.second, "palette weights must be non-negative");
            total += w;
          }
          if (palette.weights.size() != palette.values.size() || !(total > 0.0)) {
            fail(kv.second, "palette weights must match values and have a positive sum");
          }
        }
        if (a == Attribute::Activity) fail(kv.first, "activity follows the activity mix, not a palette");
        cfg.palettes[index_of(a)] = palette;
      }
    }
    if (const YAML::Node agents = p["agents"]) {
      if (!agents.IsSequence()) fail(agents, "population.agents must be a list");
      for (const auto& a : agents) cfg.fixed.push_back(agent(a, cfg));
    }
    return cfg;
  }

  UserAgent agent(const YAML::Node& n, const PopulationConfig& pop) const {
    only_keys(n, {"id", "route", "speed", "spawn_tick", "attributes"});
    UserAgent u;
    u.true_id = require<std::uint32_t>(n, "id");
    u.route = require<std::vector<SensorId>>(n, "route");
    u.attributes.speed = require<double>(n, "speed");
    if (!(u.attributes.speed > 0.0)) fail(n["speed"], "agent speed must be positive");
    u.spawn_tick = get<Tick>(n, "spawn_tick", 0);
    if (const YAML::Node attrs = n["attributes"]) {
      if (!attrs.IsMap()) fail(attrs, "agent attributes must be a mapping");
      for (const auto& kv : attrs) {
        const Attribute a = attribute(kv.first);
        if (a == Attribute::Activity) fail(kv.first, "activity follows the agent's speed");
        const auto& values = pop.palettes[index_of(a)].values;
        const auto text = as<std::string>(kv.second, "attribute value");
        const auto it = std::find(values.begin(), values.end(), text);
        if (it == values.end()) fail(kv.second, "'" + text + "' is not in the " + std::string(name_of(a)) + " palette");
        u.attributes.set(a, static_cast<std::uint8_t>(it - values.begin()));
      }
    }
    return u;
  }

  NoiseModel noise(const YAML::Node& n) const {
    only_keys(n, {"flip", "speed_sigma"});
    NoiseModel model;
    if (const YAML::Node flip = n["flip"]) {
      if (flip.IsScalar()) {
        model.flip.fill(as<double>(flip, "flip"));
      } else {
        if (!flip.IsMap()) fail(flip, "flip must be a probability or a per-attribute mapping");
        for (const auto& kv : flip) model.flip[index_of(attribute(kv.first))] = as<double>(kv.second, "flip");
      }
    }
    model.speed_sigma = get<double>(n, "speed_sigma", 0.0);
    return model;
  }

  ProtocolConfig protocol(const YAML::Node& p) const {
    only_keys(p, {"k", "direction", "history", "history_min", "window", "speed_tolerance", "eta_gating",
                  "single_successor"});
    ProtocolConfig cfg;
    cfg.selection.k = get<std::size_t>(p, "k", cfg.selection.k);
    cfg.selection.history = get<std::size_t>(p, "history", cfg.selection.history);
    cfg.selection.history_min = get<std::size_t>(p, "history_min", cfg.selection.history_min);
    if (const YAML::Node d = p["direction"]) {
      const auto text = as<std::string>(d, "direction");
      if (text == "lowest") {
        cfg.selection.direction = SelectionDirection::Lowest;
      } else if (text == "highest") {
        cfg.selection.direction = SelectionDirection::Highest;
      } else {
        fail(d, "direction must be lowest or highest");
      }
    }
    if (const YAML::Node w = p["window"]) {
      only_keys(w, {"min_half_width", "fraction"});
      cfg.window.min_half_width = get<Tick>(w, "min_half_width", cfg.window.min_half_width);
      cfg.window.fraction = get<double>(w, "fraction", cfg.window.fraction);
    }
    cfg.match.speed_rel = get<double>(p, "speed_tolerance", cfg.match.speed_rel);
    cfg.match.eta_gating = get<bool>(p, "eta_gating", true);
    cfg.single_successor = get<bool>(p, "single_successor", true);
    return cfg;
  }

 private:
  std::string source_;
};

}  // namespace detail

/// Parses a version-1 scenario document. Faults name the source and line.
inline ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::ConfigInvalid, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorCode::ConfigInvalid, source + ": scenario must be a mapping");
  return detail::ScenarioReader(source).read(root);
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace trailsim
