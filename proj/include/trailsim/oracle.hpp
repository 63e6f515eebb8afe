#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trailsim/graph.hpp"
#include "trailsim/sensing.hpp"

namespace trailsim {

/// Linking rules for the exhaustive oracle. Deliberately restated here
/// rather than reusing the online matcher.
struct OracleRules {
  double speed_rel = 0.10;
  std::int64_t min_half_width = 2;
  double window_fraction = 0.2;
  double tick_seconds = 1.0;
  AttributeMask compared = AttributeMask::all();
  bool eta_gating = true;
};

using Partition = std::vector<std::vector<ObsId>>;

inline constexpr std::size_t kOracleLimit = 12;

namespace detail {

/// Can `next` directly follow `prev` on one person's trail?
inline bool can_follow(const Observation& prev, const Observation& next, const ParkGraph& graph,
                       const OracleRules& rules) {
  if (!prev.finalized() || next.a <= prev.depart_tick) return false;
  double length = -1.0;
  for (const Neighbor& n : graph.neighbors(prev.sensor)) {
    if (n.id == next.sensor) length = n.distance;
  }
  if (length < 0.0) return false;

  for (Attribute a : rules.compared.members()) {
    const auto x = prev.perceived.get(a);
    const auto y = next.perceived.get(a);
    if (x && y && *x != *y) return false;
  }
  if (!rules.eta_gating) return true;

  if (std::fabs(next.perceived.speed - prev.perceived.speed) > rules.speed_rel * prev.perceived.speed) {
    return false;
  }
  const double gap = std::max(0.0, length - graph.sensor(prev.sensor).range - graph.sensor(next.sensor).range);
  const auto travel = static_cast<std::int64_t>(std::llround(gap / (prev.perceived.speed * rules.tick_seconds)));
  const std::int64_t expected = prev.depart_tick + travel;
  const std::int64_t slack = std::max<std::int64_t>(
      rules.min_half_width, static_cast<std::int64_t>(std::ceil(rules.window_fraction * travel - 1e-9)));
  return next.a >= expected - slack && next.a <= expected + slack;
}

struct ChainSearch {
  const std::vector<std::vector<bool>>& follows;
  std::size_t n;
  std::vector<std::size_t> label;
  std::vector<std::size_t> tails;
  std::vector<std::size_t> best_label;
  std::size_t best = SIZE_MAX;

  void run(std::size_t i) {
    if (tails.size() >= best) return;
    if (i == n) {
      best = tails.size();
      best_label = label;
      return;
    }
    for (std::size_t c = 0; c < tails.size(); ++c) {
      if (!follows[tails[c]][i]) continue;
      const std::size_t saved = tails[c];
      tails[c] = i;
      label[i] = c;
      run(i + 1);
      tails[c] = saved;
    }
    tails.push_back(i);
    label[i] = tails.size() - 1;
    run(i + 1);
    tails.pop_back();
  }
};

}  // namespace detail

/// Exhaustively finds a partition of the observations into the fewest
/// trail-consistent chains; among those, the lexicographically smallest
/// chain labelling in arrival order.
inline Partition brute_force_oracle(std::span<const Observation> observations, const ParkGraph& graph,
                                    const OracleRules& rules = {}) {
  if (observations.size() > kOracleLimit) {
    throw Error(ErrorCode::TooLarge, std::to_string(observations.size()) + " observations exceed the oracle limit of " +
                                         std::to_string(kOracleLimit));
  }
  std::vector<Observation> obs(observations.begin(), observations.end());
  std::sort(obs.begin(), obs.end(), [](const Observation& l, const Observation& r) {
    return l.a != r.a ? l.a < r.a : l.obs_id < r.obs_id;
  });
  const std::size_t n = obs.size();
  std::vector<std::vector<bool>> follows(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) follows[i][j] = detail::can_follow(obs[i], obs[j], graph, rules);
  }
  detail::ChainSearch search{follows, n, std::vector<std::size_t>(n, 0), {}, {}};
  search.run(0);

  Partition chains(search.best == SIZE_MAX ? 0 : search.best);
  for (std::size_t i = 0; i < n; ++i) chains[search.best_label[i]].push_back(obs[i].obs_id);
  return chains;
}

/// Canonical form for comparing partitions: chains sorted internally and
/// by their smallest member.
inline Partition canonical(Partition p) {
  for (auto& chain : p) std::sort(chain.begin(), chain.end());
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace trailsim
