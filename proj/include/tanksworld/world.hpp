#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tanksworld/core.hpp"

namespace tanksworld {

/// Physical constants of the arena. All lengths in world units, times in
/// seconds unless suffixed with `ticks`.
struct PhysicsParams {
  double arena_side = 100.0;
  double dt = 0.1;
  double max_speed = 5.0;
  double max_turn_rate = std::numbers::pi / 2.0;
  double tank_radius = 1.5;
  double projectile_speed = 20.0;
  int projectile_lifetime = 25;
  double projectile_radius = 0.5;
  int reload_interval = 10;
  double obstacle_radius_min = 1.0;
  double obstacle_radius_max = 4.0;
  // Reserved; only one-hit kills are simulated.
  int tank_health = 1;

  /// Maximum distance a projectile travels over its lifetime.
  double projectile_range() const { return projectile_speed * dt * projectile_lifetime; }
};

struct Action {
  double throttle = 0.0;
  double steer = 0.0;
  double fire = 0.0;

  /// Copy with every component clamped into [-1, 1]. NaN maps to 0.
  Action clamped() const;
  friend bool operator==(const Action&, const Action&) = default;
};

struct TankState {
  TankId id = 0;
  Team team = Team::Neutral;
  Pose pose;
  bool alive = true;
  int reload_remaining = 0;
};

struct Projectile {
  TankId shooter_id = 0;
  Pose pose;
  int age = 0;
};

struct Obstacle {
  Pose center;
  double radius = 1.0;
};

struct KillEvent {
  TankId shooter_id = 0;
  TankId victim_id = 0;
  Team shooter_team = Team::Neutral;
  Team victim_team = Team::Neutral;
  std::uint64_t tick = 0;

  friend bool operator==(const KillEvent&, const KillEvent&) = default;
};

struct WorldState {
  std::uint64_t tick = 0;
  std::vector<TankState> tanks;  // index == id
  std::vector<Projectile> projectiles;
  std::vector<Obstacle> obstacles;
  double arena_side = 100.0;

  const TankState& tank(TankId id) const { return tanks.at(id); }
  /// Hash over every field, bit-exact on doubles.
  std::uint64_t hash() const;
};

/// Everything needed to lay out a fresh arena.
struct WorldSpec {
  int team_size = 5;
  int neutral_count = 2;
  double obstacle_density = 0.5;
  PhysicsParams physics;
};

using ActionMap = std::map<TankId, Action>;

struct StepOutcome {
  WorldState state;
  std::vector<KillEvent> events;
};

/// Obstacles per unit density.
inline constexpr int kMaxObstacles = 20;
inline constexpr int kPlacementAttempts = 10'000;
/// Minimum surface clearance between spawned bodies.
inline constexpr double kSpawnClearance = 1.0;

/// Lays out 2·N team tanks (red ids first, then blue), the neutrals and
/// round(density·20) obstacles. Deterministic in (spec, seed).
WorldState spawn_world(const WorldSpec& spec, std::uint64_t seed);

/// Explicit Euler: heading first, then translation along the new heading.
TankState integrate_tank(const TankState& tank, const Action& action, const PhysicsParams& physics);

/// Returns a projectile at the tank's nose iff fire > 0 and the tank is
/// reloaded; on firing `tank.reload_remaining` is reset to the interval.
std::optional<Projectile> fire_control(TankState& tank, double fire, const PhysicsParams& physics);

/// One tick of the simulation. Every alive red/blue tank needs an action;
/// neutrals default to the zero action when absent.
StepOutcome step_world(WorldState state, const ActionMap& actions, const PhysicsParams& physics);

/// Pushes overlapping bodies apart and clamps tanks into the arena.
void resolve_collisions(WorldState& state, const PhysicsParams& physics);

}  // namespace tanksworld
