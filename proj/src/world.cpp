#include "tanksworld/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tanksworld {

namespace {

double clamp_unit(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -1.0, 1.0);
}

// Closest distance from `c` to the segment [a, b].
double segment_distance(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a;
  const double len_sq = norm_sq(ab);
  double t = 0.0;
  if (len_sq > 0.0) t = std::clamp(dot(c - a, ab) / len_sq, 0.0, 1.0);
  return distance(a + ab * t, c);
}

// Obstacles keep room for a tank to pass between them and the walls.
double obstacle_gap(const PhysicsParams& physics) { return 2.0 * physics.tank_radius + kSpawnClearance; }

bool overlaps_any(Vec2 p, double radius, double clearance, const std::vector<Obstacle>& obstacles) {
  for (const auto& o : obstacles) {
    if (distance(p, o.center.position()) < radius + o.radius + clearance) return true;
  }
  return false;
}

bool overlaps_any(Vec2 p, double radius, double clearance, const std::vector<TankState>& tanks) {
  for (const auto& t : tanks) {
    if (distance(p, t.pose.position()) < 2.0 * radius + clearance) return true;
  }
  return false;
}

[[noreturn]] void overcrowded(std::string_view what) {
  throw Error(ErrorKind::ArenaOvercrowded,
              "arena overcrowded: could not place " + std::string(what) + " after " +
                  std::to_string(kPlacementAttempts) + " attempts");
}

}  // namespace

Action Action::clamped() const { return {clamp_unit(throttle), clamp_unit(steer), clamp_unit(fire)}; }

std::uint64_t WorldState::hash() const {
  Fnv1a h;
  h.update_u64(tick);
  h.update_f64(arena_side);
  h.update_u64(tanks.size());
  for (const auto& t : tanks) {
    h.update_u64(t.id);
    h.update_u64(static_cast<std::uint64_t>(t.team));
    h.update_f64(t.pose.x);
    h.update_f64(t.pose.y);
    h.update_f64(t.pose.heading);
    h.update_u64(t.alive ? 1 : 0);
    h.update_u64(static_cast<std::uint64_t>(t.reload_remaining));
  }
  h.update_u64(projectiles.size());
  for (const auto& p : projectiles) {
    h.update_u64(p.shooter_id);
    h.update_f64(p.pose.x);
    h.update_f64(p.pose.y);
    h.update_f64(p.pose.heading);
    h.update_u64(static_cast<std::uint64_t>(p.age));
  }
  h.update_u64(obstacles.size());
  for (const auto& o : obstacles) {
    h.update_f64(o.center.x);
    h.update_f64(o.center.y);
    h.update_f64(o.radius);
  }
  return h.digest();
}

WorldState spawn_world(const WorldSpec& spec, std::uint64_t seed) {
  if (spec.team_size < 1) throw Error(ErrorKind::Config, "team_size must be >= 1");
  if (spec.neutral_count < 0) throw Error(ErrorKind::Config, "neutral_count must be >= 0");
  if (!(spec.obstacle_density >= 0.0 && spec.obstacle_density <= 1.0)) {
    throw Error(ErrorKind::Config, "obstacle_density must lie in [0, 1]");
  }
  const PhysicsParams& ph = spec.physics;
  Rng rng(derive_stream_seed(seed, Stream::Placement));

  WorldState world;
  world.arena_side = ph.arena_side;

  const int n_obstacles = static_cast<int>(std::lround(spec.obstacle_density * kMaxObstacles));
  const double gap = obstacle_gap(ph);
  for (int i = 0; i < n_obstacles; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
      const double r = rng.uniform(ph.obstacle_radius_min, ph.obstacle_radius_max);
      const double lo = r + gap;
      const double hi = ph.arena_side - r - gap;
      if (hi <= lo) continue;
      const Vec2 c{rng.uniform(lo, hi), rng.uniform(lo, hi)};
      if (overlaps_any(c, r, gap, world.obstacles)) continue;
      world.obstacles.push_back({{c.x, c.y, 0.0}, r});
      placed = true;
    }
    if (!placed) overcrowded("obstacle " + std::to_string(i));
  }

  const double r = ph.tank_radius;
  const double edge = r + kSpawnClearance;
  const double third = ph.arena_side / 3.0;
  auto place_tank = [&](Team team, double x_lo, double x_hi) {
    const TankId id = static_cast<TankId>(world.tanks.size());
    for (int attempt = 0; attempt < kPlacementAttempts && x_lo < x_hi; ++attempt) {
      const Vec2 p{rng.uniform(x_lo, x_hi), rng.uniform(edge, ph.arena_side - edge)};
      const double heading = normalize_angle(rng.uniform(0.0, kTwoPi));
      if (overlaps_any(p, r, kSpawnClearance, world.obstacles)) continue;
      if (overlaps_any(p, r, kSpawnClearance, world.tanks)) continue;
      world.tanks.push_back({id, team, {p.x, p.y, heading}, true, 0});
      return;
    }
    overcrowded(std::string(team_name(team)) + " tank " + std::to_string(id));
  };
  // Teams start in opposite thirds; neutrals anywhere.
  for (int i = 0; i < spec.team_size; ++i) place_tank(Team::Red, edge, third);
  for (int i = 0; i < spec.team_size; ++i) place_tank(Team::Blue, ph.arena_side - third, ph.arena_side - edge);
  for (int i = 0; i < spec.neutral_count; ++i) place_tank(Team::Neutral, edge, ph.arena_side - edge);
  return world;
}

TankState integrate_tank(const TankState& tank, const Action& action, const PhysicsParams& physics) {
  TankState out = tank;
  if (!tank.alive) return out;
  const Action a = action.clamped();
  out.pose.heading = normalize_angle(tank.pose.heading + a.steer * physics.max_turn_rate * physics.dt);
  const Vec2 step = heading_vector(out.pose.heading) * (a.throttle * physics.max_speed * physics.dt);
  out.pose.x += step.x;
  out.pose.y += step.y;
  return out;
}

std::optional<Projectile> fire_control(TankState& tank, double fire, const PhysicsParams& physics) {
  if (!tank.alive || !(fire > 0.0) || tank.reload_remaining != 0) return std::nullopt;
  tank.reload_remaining = physics.reload_interval;
  const Vec2 nose = tank.pose.position() + heading_vector(tank.pose.heading) * physics.tank_radius;
  return Projectile{tank.id, {nose.x, nose.y, tank.pose.heading}, 0};
}

void resolve_collisions(WorldState& state, const PhysicsParams& physics) {
  constexpr int kMaxPasses = 64;
  constexpr double kSlop = 1e-12;
  const double r = physics.tank_radius;
  const double lo = r;
  const double hi = state.arena_side - r;

  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < state.tanks.size(); ++i) {
      auto& a = state.tanks[i];
      if (!a.alive) continue;
      for (std::size_t j = i + 1; j < state.tanks.size(); ++j) {
        auto& b = state.tanks[j];
        if (!b.alive) continue;
        const Vec2 d = b.pose.position() - a.pose.position();
        const double dist = norm(d);
        const double overlap = 2.0 * r - dist;
        if (overlap <= kSlop) continue;
        const Vec2 n = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
        const Vec2 push = n * (overlap * 0.5);
        a.pose.x -= push.x;
        a.pose.y -= push.y;
        b.pose.x += push.x;
        b.pose.y += push.y;
        moved = true;
      }
    }
    for (auto& t : state.tanks) {
      if (!t.alive) continue;
      for (const auto& o : state.obstacles) {
        const Vec2 d = t.pose.position() - o.center.position();
        const double dist = norm(d);
        const double contact = r + o.radius;
        if (contact - dist <= kSlop) continue;
        const Vec2 n = dist > 0.0 ? d * (1.0 / dist) : Vec2{1.0, 0.0};
        t.pose.x = o.center.x + n.x * contact;
        t.pose.y = o.center.y + n.y * contact;
        moved = true;
      }
      const double cx = std::clamp(t.pose.x, lo, hi);
      const double cy = std::clamp(t.pose.y, lo, hi);
      if (cx != t.pose.x || cy != t.pose.y) {
        t.pose.x = cx;
        t.pose.y = cy;
        moved = true;
      }
    }
    if (!moved) break;
  }
}

StepOutcome step_world(WorldState state, const ActionMap& actions, const PhysicsParams& physics) {
  for (const auto& t : state.tanks) {
    if (t.alive && t.team != Team::Neutral && !actions.contains(t.id)) {
      throw Error(ErrorKind::IncompleteActionMap,
                  "incomplete action map: no action for tank " + std::to_string(t.id));
    }
  }
  auto action_for = [&](TankId id) {
    auto it = actions.find(id);
    return it == actions.end() ? Action{} : it->second.clamped();
  };

  // (1) reload timers
  for (auto& t : state.tanks) {
    if (t.alive && t.reload_remaining > 0) --t.reload_remaining;
  }
  // (2) kinematics, in id order
  for (auto& t : state.tanks) {
    if (t.alive) t = integrate_tank(t, action_for(t.id), physics);
  }
  // (3) contacts
  resolve_collisions(state, physics);
  // (4) firing, in id order
  for (auto& t : state.tanks) {
    if (!t.alive) continue;
    if (auto p = fire_control(t, action_for(t.id).fire, physics)) state.projectiles.push_back(*p);
  }
  // (5) flight and (6) hits, swept over this tick's segment
  StepOutcome out;
  const double hit_radius = physics.tank_radius + physics.projectile_radius;
  const double travel = physics.projectile_speed * physics.dt;
  std::vector<Projectile> surviving;
  surviving.reserve(state.projectiles.size());
  for (auto p : state.projectiles) {
    const Vec2 from = p.pose.position();
    const Vec2 to = from + heading_vector(p.pose.heading) * travel;
    p.pose.x = to.x;
    p.pose.y = to.y;
    ++p.age;

    TankState* victim = nullptr;
    for (auto& t : state.tanks) {
      if (!t.alive || t.id == p.shooter_id) continue;
      if (segment_distance(from, to, t.pose.position()) <= hit_radius) {
        victim = &t;  // smallest id wins
        break;
      }
    }
    if (victim != nullptr) {
      victim->alive = false;
      const Team shooter_team = state.tanks.at(p.shooter_id).team;
      out.events.push_back({p.shooter_id, victim->id, shooter_team, victim->team, state.tick});
      continue;
    }
    if (p.age < physics.projectile_lifetime) surviving.push_back(p);
  }
  state.projectiles = std::move(surviving);
  ++state.tick;
  out.state = std::move(state);
  return out;
}

}  // namespace tanksworld
