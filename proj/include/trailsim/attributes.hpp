#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trailsim/errors.hpp"

namespace trailsim {

/// Categorical attributes a sensor may perceive. Declaration order is the
/// catalog order used for tie breaking and as the static selection fallback.
enum class Attribute : std::uint8_t {
  TopColor,
  Activity,
  AgeGroup,
  Gender,
  BottomColor,
  Accessories,
};

inline constexpr std::size_t kAttributeCount = 6;

inline constexpr std::array<Attribute, kAttributeCount> kCatalogOrder = {
    Attribute::TopColor, Attribute::Activity,    Attribute::AgeGroup,
    Attribute::Gender,   Attribute::BottomColor, Attribute::Accessories,
};

constexpr std::size_t index_of(Attribute a) { return static_cast<std::size_t>(a); }

constexpr std::string_view name_of(Attribute a) {
  switch (a) {
    case Attribute::TopColor: return "top_color";
    case Attribute::Activity: return "activity";
    case Attribute::AgeGroup: return "age_group";
    case Attribute::Gender: return "gender";
    case Attribute::BottomColor: return "bottom_color";
    case Attribute::Accessories: return "accessories";
  }
  return "?";
}

/// Number of distinct values of each categorical attribute.
constexpr std::size_t cardinality(Attribute a) {
  switch (a) {
    case Attribute::TopColor:
    case Attribute::BottomColor: return 8;
    case Attribute::Activity:
    case Attribute::AgeGroup: return 3;
    case Attribute::Gender: return 2;
    case Attribute::Accessories: return 4;
  }
  return 0;
}

inline Attribute parse_attribute(std::string_view text) {
  for (Attribute a : kCatalogOrder) {
    if (name_of(a) == text) return a;
  }
  throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(text) + "'");
}

/// Subset of the categorical catalog.
class AttributeMask {
 public:
  constexpr AttributeMask() = default;

  static AttributeMask all() {
    AttributeMask m;
    m.bits_.set();
    return m;
  }

  static AttributeMask of(std::initializer_list<Attribute> attrs) {
    AttributeMask m;
    for (Attribute a : attrs) m.insert(a);
    return m;
  }

  void insert(Attribute a) { bits_.set(index_of(a)); }
  void erase(Attribute a) { bits_.reset(index_of(a)); }
  bool contains(Attribute a) const { return bits_.test(index_of(a)); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }
  bool subset_of(const AttributeMask& other) const { return (bits_ & ~other.bits_).none(); }

  AttributeMask operator&(const AttributeMask& other) const {
    AttributeMask m;
    m.bits_ = bits_ & other.bits_;
    return m;
  }

  bool operator==(const AttributeMask&) const = default;

  /// Members in catalog order.
  std::vector<Attribute> members() const {
    std::vector<Attribute> out;
    for (Attribute a : kCatalogOrder) {
      if (contains(a)) out.push_back(a);
    }
    return out;
  }

 private:
  std::bitset<kAttributeCount> bits_;
};

enum class Activity : std::uint8_t { Walk = 0, Jog = 1, Bike = 2 };

inline constexpr double kWalkMaxSpeed = 1.8;
inline constexpr double kJogMaxSpeed = 4.0;

struct SpeedBand {
  double lo;
  double hi;
};

/// Sampling bands; each lies inside its activity's classification interval.
constexpr SpeedBand speed_band(Activity a) {
  switch (a) {
    case Activity::Walk: return {0.8, 1.8};
    case Activity::Jog: return {1.9, 4.0};
    case Activity::Bike: return {4.1, 8.0};
  }
  return {0.0, 0.0};
}

inline Activity classify_activity(double speed) {
  if (!(speed > 0.0)) {
    throw Error(ErrorCode::NonPositiveSpeed, "speed must be positive, got " + std::to_string(speed));
  }
  if (speed <= kWalkMaxSpeed) return Activity::Walk;
  if (speed <= kJogMaxSpeed) return Activity::Jog;
  return Activity::Bike;
}

/// Appearance plus kinematics of one person, as known to ground truth or as
/// perceived by a sensor. Unperceived categorical values are empty.
struct AttributeVector {
  std::array<std::optional<std::uint8_t>, kAttributeCount> values{};
  double speed = 1.0;

  std::optional<std::uint8_t> get(Attribute a) const { return values[index_of(a)]; }
  void set(Attribute a, std::optional<std::uint8_t> v) { values[index_of(a)] = v; }

  /// Re-derives the activity category from speed (if activity is tracked).
  void sync_activity() {
    if (values[index_of(Attribute::Activity)]) {
      values[index_of(Attribute::Activity)] = static_cast<std::uint8_t>(classify_activity(speed));
    }
  }

  AttributeVector restricted_to(const AttributeMask& mask) const {
    AttributeVector out = *this;
    for (Attribute a : kCatalogOrder) {
      if (!mask.contains(a)) out.set(a, std::nullopt);
    }
    return out;
  }

  bool operator==(const AttributeVector&) const = default;
};

}  // namespace trailsim
