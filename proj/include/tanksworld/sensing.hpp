#pragma once

#include <vector>

#include "tanksworld/world.hpp"

namespace tanksworld {

struct SensingOptions {
  double comm_range = 30.0;
  /// Relay only through allies directly linked to the observer.
  bool two_hop_only = false;
  /// Neutrals bypass the sensing rule and are always visible.
  bool neutral_always_visible = false;
};

/// Connected components of a team's alive tanks under links of length
/// <= comm_range. Components are sorted by smallest member id; members
/// ascend within a component.
struct CommGraph {
  Team team = Team::Red;
  double comm_range = 0.0;
  std::vector<std::vector<TankId>> components;

  /// Index into `components`, or -1 for dead / foreign tanks.
  int component_of(TankId id) const;
};

struct VisibilitySet {
  TankId observer_id = 0;
  std::vector<TankId> visible_enemies;   // ascending
  std::vector<TankId> visible_neutrals;  // ascending

  friend bool operator==(const VisibilitySet&, const VisibilitySet&) = default;
};

CommGraph ally_components(const WorldState& state, Team team, double comm_range);

/// What `tank_id` can perceive: an enemy or neutral is visible iff some
/// alive ally in the observer's relay group (itself included) is within
/// comm_range of it. Throws ObserverDead for a dead observer.
VisibilitySet visibility_sets(const WorldState& state, TankId tank_id, const SensingOptions& options);

/// Visibility for every alive red/blue tank, indexed by id. Entries for
/// dead tanks and neutrals are empty.
std::vector<VisibilitySet> visibility_all(const WorldState& state, const SensingOptions& options);

}  // namespace tanksworld
