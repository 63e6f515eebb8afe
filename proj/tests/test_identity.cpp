#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "trailsim/engine.hpp"
#include "trailsim/identity.hpp"
#include "trailsim/oracle.hpp"

using namespace trailsim;

namespace {

Observation seen(ObsId id, SensorId sensor, Tick a, Tick depart, double speed,
                 AttributeVector v = fixtures::look(2, 1, 0, 3, 1, 1.0)) {
  Observation o;
  o.obs_id = id;
  o.sensor = sensor;
  o.a = a;
  o.depart_tick = depart;
  v.speed = speed;
  v.sync_activity();
  o.perceived = v;
  return o;
}

std::vector<PendingMatch> pending_from(const Observation& origin, const ParkGraph& g, SensorId target) {
  std::vector<PendingMatch> out;
  const std::vector<Attribute> all(kCatalogOrder.begin(), kCatalogOrder.end());
  for (HandoffMessage& m : make_handoffs(origin, g, all, WindowPolicy{})) {
    if (m.target == target) out.push_back({std::move(m), PendingState::Open});
  }
  return out;
}

}  // namespace

TEST(MatchObservation, NoPendingMeansNewUser) {
  std::vector<PendingMatch> none;
  const MatchDecision d = match_observation(seen(0, 1, 50, 60, 2.0), none, MatchTolerance{});
  EXPECT_FALSE(d.same_user());
  EXPECT_FALSE(d.matched_message);
}

TEST(MatchObservation, ArrivalAtEtaMatchesAndOracleAgrees) {
  const ParkGraph g = fixtures::line({0, 100});
  const Observation first = seen(0, 0, 0, 15, 2.0);
  auto pending = pending_from(first, g, 1);
  ASSERT_EQ(pending.size(), 1u);
  const Observation second = seen(1, 1, pending[0].message.eta, pending[0].message.eta + 15, 2.0);
  const MatchDecision d = match_observation(second, pending, MatchTolerance{});
  ASSERT_TRUE(d.same_user());
  EXPECT_EQ(*d.origin_obs_id, 0u);
  EXPECT_EQ(pending[0].state, PendingState::Consumed);

  const std::vector<Observation> both{first, second};
  EXPECT_EQ(brute_force_oracle(both, g).size(), 1u);
}

TEST(MatchObservation, ArrivalOutsideWindowIsNewAndOracleAgrees) {
  const ParkGraph g = fixtures::line({0, 100});
  const Observation first = seen(0, 0, 0, 15, 2.0);
  auto pending = pending_from(first, g, 1);
  const Tick late = pending[0].message.window.hi + 1;
  const Observation second = seen(1, 1, late, late + 15, 2.0);
  EXPECT_FALSE(match_observation(second, pending, MatchTolerance{}).same_user());
  EXPECT_EQ(pending[0].state, PendingState::Open);

  const std::vector<Observation> both{first, second};
  EXPECT_EQ(brute_force_oracle(both, g).size(), 2u);
}

TEST(MatchObservation, NearestEtaWins) {
  std::vector<PendingMatch> pending(2);
  pending[0].message.origin_obs_id = 7;
  pending[0].message.eta = 54;
  pending[0].message.window = {44, 64};
  pending[0].message.speed = 2.0;
  pending[1].message.origin_obs_id = 3;
  pending[1].message.eta = 50;
  pending[1].message.window = {40, 60};
  pending[1].message.speed = 2.0;
  const MatchDecision d = match_observation(seen(9, 1, 51, 60, 2.0), pending, MatchTolerance{});
  ASSERT_TRUE(d.same_user());
  EXPECT_EQ(*d.origin_obs_id, 3u);
  EXPECT_EQ(d.matched_message->eta, 50);
}

TEST(MatchObservation, EqualGapPrefersLowestOrigin) {
  std::vector<PendingMatch> pending(2);
  pending[0].message.origin_obs_id = 8;
  pending[0].message.eta = 52;
  pending[0].message.window = {40, 60};
  pending[0].message.speed = 2.0;
  pending[1].message.origin_obs_id = 4;
  pending[1].message.eta = 50;
  pending[1].message.window = {40, 60};
  pending[1].message.speed = 2.0;
  EXPECT_EQ(*match_observation(seen(9, 1, 51, 60, 2.0), pending, MatchTolerance{}).origin_obs_id, 4u);
}

TEST(MatchObservation, RejectsAttributeOrSpeedMismatch) {
  std::vector<PendingMatch> pending(1);
  pending[0].message.eta = 50;
  pending[0].message.window = {40, 60};
  pending[0].message.speed = 2.0;
  pending[0].message.selected = {{Attribute::TopColor, 2}};
  EXPECT_FALSE(match_observation(seen(1, 1, 50, 60, 2.3), pending, MatchTolerance{}).same_user());
  EXPECT_FALSE(match_observation(seen(1, 1, 50, 60, 2.0, fixtures::look(5, 1, 0, 3, 1, 1.0)), pending,
                                 MatchTolerance{})
                   .same_user());
  // An attribute the arriving sensor cannot perceive does not veto.
  Observation blind = seen(1, 1, 50, 60, 2.1);
  blind.perceived.set(Attribute::TopColor, std::nullopt);
  EXPECT_TRUE(match_observation(blind, pending, MatchTolerance{}).same_user());
}

TEST(MatchObservation, WithoutGatingTimeAndSpeedAreIgnored) {
  std::vector<PendingMatch> pending(2);
  pending[0].message.origin_obs_id = 5;
  pending[0].message.window = {40, 60};
  pending[0].message.speed = 2.0;
  pending[1].message.origin_obs_id = 2;
  pending[1].message.window = {40, 60};
  pending[1].message.speed = 2.0;
  const MatchTolerance loose{0.10, false};
  const MatchDecision d = match_observation(seen(9, 1, 500, 510, 7.0), pending, loose);
  ASSERT_TRUE(d.same_user());
  EXPECT_EQ(*d.origin_obs_id, 2u);
}

TEST(MatchObservation, ConsumedMessageFulfilsOnce) {
  std::vector<PendingMatch> pending(1);
  pending[0].message.eta = 50;
  pending[0].message.window = {40, 60};
  pending[0].message.speed = 2.0;
  EXPECT_TRUE(match_observation(seen(1, 1, 50, 60, 2.0), pending, MatchTolerance{}).same_user());
  EXPECT_FALSE(match_observation(seen(2, 1, 50, 60, 2.0), pending, MatchTolerance{}).same_user());
}

TEST(Ingest, FirstObservationOpensIdentity) {
  IdentityRegistry reg;
  EXPECT_EQ(reg.unique_count(), 0u);
  EXPECT_EQ(unique_count(reg), 0u);
  const UserId u = reg.ingest(seen(0, 0, 3, 9, 1.0), MatchDecision{});
  EXPECT_EQ(reg.unique_count(), 1u);
  EXPECT_EQ(reg.trail(u).size(), 1u);
  EXPECT_EQ(reg.trail(u)[0], (TrailHop{0, 3, 0}));
}

TEST(Ingest, NoMatchesMeansOneIdentityPerObservation) {
  IdentityRegistry reg;
  for (ObsId i = 0; i < 17; ++i) reg.ingest(seen(i, 0, static_cast<Tick>(i), static_cast<Tick>(i) + 5, 1.0), {});
  EXPECT_EQ(reg.unique_count(), 17u);
}

TEST(Ingest, UnknownOriginIsRejected) {
  IdentityRegistry reg;
  MatchDecision d;
  d.outcome = MatchDecision::Outcome::SameUser;
  d.origin_obs_id = 99;
  try {
    reg.ingest(seen(0, 0, 0, 5, 1.0), d);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownOrigin);
  }
}

TEST(Ingest, OneAgentAcrossThreeSensors) {
  const ParkGraph g = fixtures::line({0, 200, 400});
  const ScenarioConfig cfg = fixtures::noiseless(fixtures::clean(g, {fixtures::agent(0, {0, 1, 2}, 1.5, 0)}));
  const RunResult r = run(cfg, 1);
  EXPECT_EQ(r.registry.unique_count(), 1u);
  ASSERT_EQ(r.registry.trail(0).size(), 3u);
  for (SensorId s = 0; s < 3; ++s) EXPECT_EQ(r.registry.trail(0)[s].sensor, s);
}

TEST(Ingest, IdenticalTwinsConsumeSeparateHandoffs) {
  // Two look-alikes pass sensor 0 two ticks apart at the same speed, then
  // reach sensor 1 at their predicted ticks. Each prediction is used once.
  const ParkGraph g = fixtures::line({0, 100});
  const std::vector<Observation> obs{seen(0, 0, 0, 10, 2.0), seen(1, 0, 2, 12, 2.0), seen(2, 1, 45, 55, 2.0),
                                     seen(3, 1, 47, 57, 2.0)};
  PendingBoard board(g, true);
  IdentityRegistry reg;
  const std::vector<Attribute> all(kCatalogOrder.begin(), kCatalogOrder.end());
  for (int i = 0; i < 2; ++i) {
    reg.ingest(obs[i], match_observation(obs[i], board.at(0), MatchTolerance{}));
    for (HandoffMessage& m : make_handoffs(obs[i], g, all, WindowPolicy{})) board.post(std::move(m));
  }
  board.advance(45);
  for (int i = 2; i < 4; ++i) {
    const MatchDecision d = match_observation(obs[i], board.at(1), MatchTolerance{});
    ASSERT_TRUE(d.same_user());
    board.fulfilled(d.matched_message->id);
    reg.ingest(obs[i], d);
  }
  EXPECT_EQ(reg.unique_count(), 2u);
  EXPECT_EQ(*reg.predecessor(2), 0u);
  EXPECT_EQ(*reg.predecessor(3), 1u);
  Partition online(2);
  for (const Observation& o : obs) online[*reg.user_of(o.obs_id)].push_back(o.obs_id);
  const Partition best = brute_force_oracle(obs, g);
  EXPECT_EQ(best.size(), reg.unique_count());
  EXPECT_EQ(canonical(online), canonical(best));
}

TEST(UniqueCount, OneAgentAlongTheLinearParkInDutyMode) {
  ScenarioConfig cfg = fixtures::linear();
  cfg = fixtures::noiseless(fixtures::clean(cfg.graph, {fixtures::agent(0, {0, 1, 2, 3, 4, 5}, 1.1, 0)},
                                            PowerMode::DutyCycle));
  const RunResult r = run(cfg, 4);
  EXPECT_EQ(r.observations.size(), 6u);
  EXPECT_EQ(r.registry.unique_count(), 1u);
  EXPECT_EQ(r.missed_visits, 0u);
}

TEST(Registry, ConservationAndTrailShape) {
  for (const ScenarioConfig& cfg : {fixtures::linear(), fixtures::nonlinear()}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const RunResult r = run(cfg, seed);
      std::size_t hops = 0;
      std::map<ObsId, int> successors;
      for (UserId u = 0; u < r.registry.unique_count(); ++u) {
        const auto trail = r.registry.trail(u);
        hops += trail.size();
        for (std::size_t i = 0; i + 1 < trail.size(); ++i) {
          EXPECT_TRUE(cfg.graph.edge_length(trail[i].sensor, trail[i + 1].sensor)) << cfg.name << " seed " << seed;
          EXPECT_LT(trail[i].tick, trail[i + 1].tick);
        }
      }
      EXPECT_EQ(hops, r.observations.size());
      for (const Observation& o : r.observations) {
        ASSERT_TRUE(r.registry.user_of(o.obs_id));
        if (auto p = r.registry.predecessor(o.obs_id)) { EXPECT_EQ(++successors[*p], 1); }
      }
    }
  }
}

TEST(Registry, NoMessageFulfilsTwice) {
  for (const ScenarioConfig& cfg : {fixtures::linear(), fixtures::nonlinear()}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const RunResult r = run(cfg, seed);
      std::size_t linked = 0;
      for (const Observation& o : r.observations) linked += r.registry.predecessor(o.obs_id).has_value();
      EXPECT_EQ(linked, r.tally.fulfilled);
    }
  }
}

TEST(Registry, TruthLabelsDoNotInfluenceDecisions) {
  for (const ScenarioConfig& base : {fixtures::linear(), fixtures::nonlinear()}) {
    for (std::uint64_t seed : {3u, 4u}) {
      ScenarioConfig cfg = base;
      cfg.population.fixed = sample_population(base.population, base.graph, seed);
      ScenarioConfig relabelled = cfg;
      std::vector<std::uint32_t> labels;
      for (const UserAgent& u : cfg.population.fixed) labels.push_back(u.true_id * 7 + 1000);
      Rng rng(seed);
      rng.shuffle(std::span<std::uint32_t>(labels));
      for (std::size_t i = 0; i < labels.size(); ++i) relabelled.population.fixed[i].true_id = labels[i];

      const RunResult a = run(cfg, seed);
      const RunResult b = run(relabelled, seed);
      EXPECT_EQ(a.registry, b.registry);
      EXPECT_EQ(a.schedule, b.schedule);
      ASSERT_EQ(a.observations.size(), b.observations.size());
      for (std::size_t i = 0; i < a.observations.size(); ++i) {
        EXPECT_EQ(a.observations[i].perceived, b.observations[i].perceived);
        EXPECT_NE(a.observations[i].truth_id, b.observations[i].truth_id);
      }
      EXPECT_EQ(a.accuracy, b.accuracy);
    }
  }
}

TEST(Registry, ZeroNoiseRecoversEveryone) {
  for (const ScenarioConfig& base : {fixtures::linear(), fixtures::nonlinear()}) {
    for (PowerMode mode : {PowerMode::AlwaysOn, PowerMode::DutyCycle}) {
      ScenarioConfig cfg = fixtures::noiseless(base);
      cfg.mode = mode;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const RunResult r = run(cfg, seed);
        ASSERT_TRUE(r.accuracy);
        EXPECT_EQ(r.registry.unique_count(), r.agents.size()) << base.name << " seed " << seed;
        EXPECT_EQ(r.accuracy->trail_exact_fraction, 1.0);
        EXPECT_EQ(r.accuracy->falsely_new, 0u);
        EXPECT_EQ(r.accuracy->wrongly_merged, 0u);
      }
    }
  }
}
