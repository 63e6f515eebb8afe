#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trailsim/graph.hpp"
#include "trailsim/protocol.hpp"
#include "trailsim/sensing.hpp"

namespace trailsim {

using UserId = std::uint32_t;

enum class PendingState {
  Open,
  Consumed,
  Superseded,  // origin is no longer the tail of its identity
};

struct PendingMatch {
  HandoffMessage message;
  PendingState state = PendingState::Open;
};

struct MatchTolerance {
  double speed_rel = 0.10;
  /// When false, matching ignores arrival time and speed entirely.
  bool eta_gating = true;
};

struct MatchDecision {
  enum class Outcome { NewUser, SameUser };
  Outcome outcome = Outcome::NewUser;
  std::optional<ObsId> origin_obs_id;
  std::optional<HandoffMessage> matched_message;

  bool same_user() const { return outcome == Outcome::SameUser; }
};

inline bool attributes_agree(const HandoffMessage& msg, const AttributeVector& perceived) {
  for (const auto& [attr, value] : msg.selected) {
    const auto seen = perceived.get(attr);
    if (seen && *seen != value) return false;
  }
  return true;
}

/// Picks the open handoff that best explains an arriving observation and
/// marks it consumed. Candidates must agree on every carried attribute; with
/// gating they must also bracket the arrival tick and agree on speed. The
/// nearest ETA wins, then the lowest origin observation id.
inline MatchDecision match_observation(const Observation& obs, std::span<PendingMatch> pending,
                                       const MatchTolerance& tol) {
  PendingMatch* best = nullptr;
  Tick best_gap = std::numeric_limits<Tick>::max();
  for (PendingMatch& p : pending) {
    if (p.state != PendingState::Open) continue;
    const HandoffMessage& m = p.message;
    if (!attributes_agree(m, obs.perceived)) continue;
    Tick gap = 0;
    if (tol.eta_gating) {
      if (!m.window.contains(obs.a)) continue;
      if (std::abs(obs.perceived.speed - m.speed) > tol.speed_rel * m.speed) continue;
      gap = std::abs(obs.a - m.eta);
    }
    if (best == nullptr || gap < best_gap ||
        (gap == best_gap && m.origin_obs_id < best->message.origin_obs_id)) {
      best = &p;
      best_gap = gap;
    }
  }
  MatchDecision d;
  if (best != nullptr) {
    best->state = PendingState::Consumed;
    d.outcome = MatchDecision::Outcome::SameUser;
    d.origin_obs_id = best->message.origin_obs_id;
    d.matched_message = best->message;
  }
  return d;
}

enum class MessageFate { InFlight, Fulfilled, Expired, Clamped };

/// All handoffs of a run: in transit, waiting at their targets, and settled.
class PendingBoard {
 public:
  PendingBoard() = default;
  PendingBoard(const ParkGraph& graph, bool expire_by_window)
      : expire_by_window_(expire_by_window), waiting_(graph.size()) {
    for (std::size_t i = 0; i < graph.size(); ++i) slot_[graph.sensors()[i].id] = i;
  }

  /// Records a message; it becomes visible to its target on the next tick.
  std::uint64_t post(HandoffMessage m) {
    m.id = log_.size();
    log_.push_back(m);
    fate_.push_back(MessageFate::InFlight);
    in_transit_.push_back(m.id);
    return m.id;
  }

  /// Delivers everything emitted before t and drops windows that closed before t.
  void advance(Tick t) {
    std::vector<std::uint64_t> still;
    for (std::uint64_t id : in_transit_) {
      if (log_[id].emitted < t) {
        waiting_[slot_.at(log_[id].target)].push_back({log_[id], PendingState::Open});
      } else {
        still.push_back(id);
      }
    }
    in_transit_.swap(still);
    if (!expire_by_window_) return;
    for (auto& list : waiting_) {
      std::erase_if(list, [&](const PendingMatch& p) {
        if (p.message.window.hi >= t) return false;
        if (p.state != PendingState::Consumed) fate_[p.message.id] = MessageFate::Expired;
        return true;
      });
    }
  }

  std::span<PendingMatch> at(SensorId sensor) { return waiting_[slot_.at(sensor)]; }

  void fulfilled(std::uint64_t message_id) { fate_[message_id] = MessageFate::Fulfilled; }

  /// Invalidates the remaining open messages of an origin observation.
  void supersede(ObsId origin_obs, const ParkGraph& graph, SensorId origin_sensor) {
    for (const Neighbor& n : graph.neighbors(origin_sensor)) {
      for (PendingMatch& p : at(n.id)) {
        if (p.message.origin_obs_id == origin_obs && p.state == PendingState::Open) {
          p.state = PendingState::Superseded;
        }
      }
    }
  }

  /// Settles everything still unresolved at the end of a run.
  void close() {
    for (std::size_t i = 0; i < fate_.size(); ++i) {
      if (fate_[i] == MessageFate::InFlight) fate_[i] = MessageFate::Clamped;
    }
    in_transit_.clear();
    for (auto& list : waiting_) list.clear();
  }

  std::span<const HandoffMessage> messages() const { return log_; }
  std::span<const MessageFate> fates() const { return fate_; }

  std::size_t count(MessageFate f) const {
    std::size_t n = 0;
    for (MessageFate x : fate_) n += (x == f);
    return n;
  }

 private:
  bool expire_by_window_ = true;
  std::vector<HandoffMessage> log_;
  std::vector<MessageFate> fate_;
  std::vector<std::uint64_t> in_transit_;
  std::vector<std::vector<PendingMatch>> waiting_;
  std::map<SensorId, std::size_t> slot_;
};

struct TrailHop {
  SensorId sensor;
  Tick tick;
  ObsId obs;

  bool operator==(const TrailHop&) const = default;
};

struct IdentityRecord {
  UserId id;
  ObsId first_obs;
  AttributeVector summary;  // perceived at first sighting

  bool operator==(const IdentityRecord&) const = default;
};

/// Central store of resolved identities and their trails.
class IdentityRegistry {
 public:
  UserId ingest(const Observation& obs, const MatchDecision& decision) {
    if (obs.obs_id >= user_of_.size()) {
      user_of_.resize(obs.obs_id + 1);
      predecessor_.resize(obs.obs_id + 1);
    }
    UserId user;
    if (decision.same_user()) {
      const ObsId origin = *decision.origin_obs_id;
      if (origin >= user_of_.size() || !user_of_[origin]) {
        throw Error(ErrorCode::UnknownOrigin, "observation " + std::to_string(origin) + " was never ingested");
      }
      user = *user_of_[origin];
      predecessor_[obs.obs_id] = origin;
    } else {
      user = static_cast<UserId>(records_.size());
      records_.push_back({user, obs.obs_id, obs.perceived});
      trails_.emplace_back();
    }
    user_of_[obs.obs_id] = user;
    trails_[user].push_back({obs.sensor, obs.a, obs.obs_id});
    return user;
  }

  std::size_t unique_count() const { return records_.size(); }
  std::span<const IdentityRecord> records() const { return records_; }
  std::span<const TrailHop> trail(UserId user) const { return trails_.at(user); }

  std::optional<UserId> user_of(ObsId obs) const {
    return obs < user_of_.size() ? user_of_[obs] : std::nullopt;
  }

  /// Observation this one was chained onto, if any.
  std::optional<ObsId> predecessor(ObsId obs) const {
    return obs < predecessor_.size() ? predecessor_[obs] : std::nullopt;
  }

  bool is_tail(ObsId obs) const {
    const auto u = user_of(obs);
    return u && trails_[*u].back().obs == obs;
  }

  bool operator==(const IdentityRegistry&) const = default;

 private:
  std::vector<IdentityRecord> records_;
  std::vector<std::vector<TrailHop>> trails_;
  std::vector<std::optional<UserId>> user_of_;
  std::vector<std::optional<ObsId>> predecessor_;
};

/// Number of identities resolved so far.
inline std::size_t unique_count(const IdentityRegistry& registry) { return registry.unique_count(); }

}  // namespace trailsim
