#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "tanksworld/core.hpp"
#include "tanksworld/world.hpp"

namespace tanksworld::testing {

struct TankSpec {
  Team team;
  double x;
  double y;
  double heading = 0.0;
  bool alive = true;
};

/// Hand-built world; ids follow the order given.
inline WorldState make_world(std::initializer_list<TankSpec> tanks, double arena_side = 100.0) {
  WorldState w;
  w.arena_side = arena_side;
  TankId id = 0;
  for (const auto& t : tanks) {
    w.tanks.push_back({id++, t.team, {t.x, t.y, t.heading}, t.alive, 0});
  }
  return w;
}

inline WorldState make_world(const std::vector<TankSpec>& tanks, double arena_side = 100.0) {
  WorldState w;
  w.arena_side = arena_side;
  TankId id = 0;
  for (const auto& t : tanks) {
    w.tanks.push_back({id++, t.team, {t.x, t.y, t.heading}, t.alive, 0});
  }
  return w;
}

/// Scattered tanks; about one in seven red/blue tanks starts dead.
inline WorldState random_layout(Rng& rng, int per_team, int neutrals, double side) {
  std::vector<TankSpec> specs;
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < per_team; ++i) {
      specs.push_back({t == 0 ? Team::Red : Team::Blue, rng.uniform(0, side), rng.uniform(0, side), 0.0,
                       rng.uniform() > 0.15});
    }
  }
  for (int i = 0; i < neutrals; ++i) specs.push_back({Team::Neutral, rng.uniform(0, side), rng.uniform(0, side)});
  return make_world(specs, side);
}

inline ActionMap zero_actions(const WorldState& w) {
  ActionMap m;
  for (const auto& t : w.tanks) {
    if (t.alive) m[t.id] = Action{};
  }
  return m;
}

inline ActionMap random_actions(const WorldState& w, Rng& rng) {
  ActionMap m;
  for (const auto& t : w.tanks) {
    if (t.alive) m[t.id] = Action{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  }
  return m;
}

/// Tanks that launched a projectile during the step from `before` to `after`.
/// A launch shows either as a projectile of age 1 in flight or as the
/// reload timer sitting at its full interval (it is decremented before
/// firing, so only a launch leaves it full).
inline std::vector<TankId> spawned_this_tick(const WorldState& before, const WorldState& after,
                                             const PhysicsParams& physics) {
  std::vector<TankId> out;
  for (const auto& t : after.tanks) {
    if (!before.tanks[t.id].alive) continue;
    const bool in_flight = std::any_of(after.projectiles.begin(), after.projectiles.end(),
                                       [&](const Projectile& p) { return p.shooter_id == t.id && p.age == 1; });
    const bool reloaded = t.reload_remaining == physics.reload_interval;
    if (in_flight || reloaded) out.push_back(t.id);
  }
  return out;
}

}  // namespace tanksworld::testing
