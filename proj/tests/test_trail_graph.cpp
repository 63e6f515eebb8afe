#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "trailsim/graph.hpp"
#include "trailsim/rng.hpp"

using namespace trailsim;

namespace {

SensorSpec at(SensorId id, double x, double y, bool gate = false) {
  return {id, {x, y}, 15.0, AttributeMask::all(), gate};
}

ErrorCode code_of(const GraphSpec& spec) {
  try {
    build_graph(spec);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "graph was accepted";
  return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST(BuildGraph, TwoSensorsOneEdge) {
  GraphSpec spec{{at(0, 0, 0, true), at(1, 100, 0)}, {{0, 1, 100.0, std::nullopt}}};
  const ParkGraph g = build_graph(spec);
  EXPECT_EQ(g.size(), 2u);
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_DOUBLE_EQ(g.edges()[0].length, 100.0);
  EXPECT_TRUE(g.edges()[0].exit);
}

TEST(BuildGraph, NoEdgesIsDisconnected) {
  GraphSpec spec{{at(0, 0, 0, true), at(1, 100, 0)}, {}};
  EXPECT_EQ(code_of(spec), ErrorCode::DisconnectedGraph);
  try {
    build_graph(spec);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("{1}"), std::string::npos) << e.what();
  }
}

TEST(BuildGraph, DefaultLinearHasOneEdgeFewerThanSensors) {
  const ScenarioConfig cfg = fixtures::linear();
  EXPECT_EQ(cfg.graph.size(), 6u);
  EXPECT_EQ(cfg.graph.edges().size(), cfg.graph.size() - 1);
  for (const TrailEdge& e : cfg.graph.edges()) EXPECT_NEAR(e.length, 200.0, 1e-9);
}

TEST(BuildGraph, RejectsDuplicateIds) {
  GraphSpec spec{{at(3, 0, 0, true), at(3, 100, 0)}, {}};
  EXPECT_EQ(code_of(spec), ErrorCode::DuplicateSensorId);
}

TEST(BuildGraph, RejectsGraphWithoutEntryExit) {
  GraphSpec spec{{at(0, 0, 0), at(1, 100, 0)}, {{0, 1, std::nullopt, std::nullopt}}};
  EXPECT_EQ(code_of(spec), ErrorCode::NoEntryExitSensor);
}

TEST(BuildGraph, RejectsEdgeLengthThatDisagreesWithCoordinates) {
  GraphSpec spec{{at(0, 0, 0, true), at(7, 100, 0)}, {{0, 7, 120.0, std::nullopt}}};
  EXPECT_EQ(code_of(spec), ErrorCode::EdgeDistanceMismatch);
  try {
    build_graph(spec);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("0-7"), std::string::npos) << e.what();
  }
  spec.edges[0].length = 100.0 + 5e-7;
  EXPECT_NO_THROW(build_graph(spec));
}

TEST(BuildGraph, RejectsDuplicateEdgesAndSelfLoops) {
  GraphSpec dup{{at(0, 0, 0, true), at(1, 100, 0)},
                {{0, 1, std::nullopt, std::nullopt}, {1, 0, std::nullopt, std::nullopt}}};
  EXPECT_EQ(code_of(dup), ErrorCode::ConfigInvalid);
  GraphSpec loop{{at(0, 0, 0, true), at(1, 100, 0)},
                 {{0, 1, std::nullopt, std::nullopt}, {1, 1, std::nullopt, std::nullopt}}};
  EXPECT_EQ(code_of(loop), ErrorCode::ConfigInvalid);
}

TEST(BuildGraph, RejectsBadSensors) {
  GraphSpec unknown{{at(0, 0, 0, true), at(1, 100, 0)}, {{0, 9, std::nullopt, std::nullopt}}};
  EXPECT_EQ(code_of(unknown), ErrorCode::UnknownSensor);
  GraphSpec range{{at(0, 0, 0, true), at(1, 100, 0)}, {{0, 1, std::nullopt, std::nullopt}}};
  range.sensors[1].range = 0.0;
  EXPECT_EQ(code_of(range), ErrorCode::ConfigInvalid);
  GraphSpec caps = range;
  caps.sensors[1].range = 15.0;
  caps.sensors[1].capabilities = AttributeMask{};
  EXPECT_EQ(code_of(caps), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of(GraphSpec{}), ErrorCode::EmptyGraph);
}

TEST(BuildGraph, CapabilitiesMustFitTheCatalog) {
  GraphSpec spec{{at(0, 0, 0, true), at(1, 100, 0)}, {{0, 1, std::nullopt, std::nullopt}}};
  const AttributeMask catalog = AttributeMask::of({Attribute::TopColor, Attribute::Activity});
  EXPECT_THROW(build_graph(spec, catalog), Error);
  spec.sensors[0].capabilities = catalog;
  spec.sensors[1].capabilities = AttributeMask::of({Attribute::TopColor});
  EXPECT_NO_THROW(build_graph(spec, catalog));
}

TEST(EdgeDistance, Examples) {
  EXPECT_EQ(edge_distance({0, 0}, {0, 0}), 0.0);
  EXPECT_EQ(edge_distance({0, 0}, {3, 4}), 5.0);
  EXPECT_NEAR(edge_distance({0, 0}, {1, 1}), 1.4142135623730951, 1e-9);
}

TEST(EdgeDistance, MetricProperties) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const Point a{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    const Point b{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    const Point c{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
    EXPECT_EQ(edge_distance(a, b), edge_distance(b, a));
    EXPECT_GE(edge_distance(a, b), 0.0);
    EXPECT_EQ(edge_distance(a, a), 0.0);
    EXPECT_GT(edge_distance(a, b), 0.0);
    EXPECT_LE(edge_distance(a, c), edge_distance(a, b) + edge_distance(b, c) + 1e-9);
  }
}

TEST(Neighbors, LineEndsAndMiddle) {
  const ParkGraph g = fixtures::line({0, 100, 200});
  EXPECT_EQ(g.neighbors(1).size(), 2u);
  EXPECT_EQ(g.neighbors(0).size(), 1u);
  EXPECT_EQ(g.neighbors(0)[0], (Neighbor{1, 100.0}));
  EXPECT_THROW(g.neighbors(42), Error);
}

TEST(Neighbors, NonlinearHubHasThree) {
  const ScenarioConfig cfg = fixtures::nonlinear();
  const auto hub = cfg.graph.neighbors(2);
  ASSERT_EQ(hub.size(), 3u);
  for (const Neighbor& n : hub) {
    EXPECT_NEAR(n.distance, edge_distance(cfg.graph.sensor(2).position, cfg.graph.sensor(n.id).position), 1e-9);
  }
}

TEST(Neighbors, SymmetricInCommittedScenarios) {
  for (const ScenarioConfig& cfg : {fixtures::linear(), fixtures::nonlinear()}) {
    for (const SensorSpec& s : cfg.graph.sensors()) {
      for (const Neighbor& n : cfg.graph.neighbors(s.id)) {
        const auto back = cfg.graph.edge_length(n.id, s.id);
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(*back, n.distance);
      }
    }
  }
}

TEST(Neighbors, DegreeDistinguishesTheScenarios) {
  const ScenarioConfig lin = fixtures::linear();
  for (const SensorSpec& s : lin.graph.sensors()) EXPECT_LE(lin.graph.degree(s.id), 2u);
  const ScenarioConfig non = fixtures::nonlinear();
  std::size_t max_degree = 0;
  for (const SensorSpec& s : non.graph.sensors()) max_degree = std::max(max_degree, non.graph.degree(s.id));
  EXPECT_GE(max_degree, 3u);
  EXPECT_EQ(non.graph.size(), 8u);
  EXPECT_EQ(non.graph.gateways().size(), 2u);
}

TEST(GatewayRoutes, AreSimplePathsBetweenDistinctGateways) {
  const ScenarioConfig cfg = fixtures::nonlinear();
  const auto routes = cfg.graph.gateway_routes();
  EXPECT_EQ(routes.size(), 4u);
  for (const auto& r : routes) {
    EXPECT_TRUE(cfg.graph.sensor(r.front()).always_on);
    EXPECT_TRUE(cfg.graph.sensor(r.back()).always_on);
    EXPECT_NE(r.front(), r.back());
    std::set<SensorId> seen(r.begin(), r.end());
    EXPECT_EQ(seen.size(), r.size());
    for (std::size_t i = 0; i + 1 < r.size(); ++i) EXPECT_TRUE(cfg.graph.edge_length(r[i], r[i + 1]));
  }
}
