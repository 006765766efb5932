#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "tanksworld/world.hpp"

using namespace tanksworld;
using namespace tanksworld::testing;

namespace {

int count_team(const WorldState& w, Team team) {
  return static_cast<int>(std::count_if(w.tanks.begin(), w.tanks.end(), [&](const auto& t) { return t.team == team; }));
}

}  // namespace

TEST_SUITE("world") {
  TEST_CASE("spawn counts follow the config") {
    WorldSpec spec{5, 2, 0.5, {}};
    const WorldState w = spawn_world(spec, 7);
    CHECK(count_team(w, Team::Red) == 5);
    CHECK(count_team(w, Team::Blue) == 5);
    CHECK(count_team(w, Team::Neutral) == 2);
    CHECK(w.obstacles.size() == 10);
    CHECK(w.tick == 0);
    for (std::size_t i = 0; i < w.tanks.size(); ++i) CHECK(w.tanks[i].id == i);
    for (int i = 0; i < 5; ++i) CHECK(w.tanks[static_cast<std::size_t>(i)].team == Team::Red);
  }

  TEST_CASE("spawn is deterministic in (config, seed)") {
    WorldSpec spec{5, 2, 0.5, {}};
    CHECK(spawn_world(spec, 7).hash() == spawn_world(spec, 7).hash());
    CHECK(spawn_world(spec, 7).hash() != spawn_world(spec, 8).hash());
  }

  TEST_CASE("density zero spawns no obstacles") {
    WorldSpec spec{5, 2, 0.0, {}};
    CHECK(spawn_world(spec, 1).obstacles.empty());
  }

  TEST_CASE("spawned bodies keep clearance and stay inside the arena") {
    WorldSpec spec{5, 2, 1.0, {}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const WorldState w = spawn_world(spec, seed);
      const double r = spec.physics.tank_radius;
      for (const auto& o : w.obstacles) {
        CHECK(o.center.x - o.radius >= 0.0);
        CHECK(o.center.x + o.radius <= w.arena_side);
        CHECK(o.center.y - o.radius >= 0.0);
        CHECK(o.center.y + o.radius <= w.arena_side);
        CHECK(o.center.heading == 0.0);
        for (const auto& p : w.obstacles) {
          if (&o == &p) continue;
          CHECK(distance(o.center.position(), p.center.position()) >= o.radius + p.radius + 1.0);
        }
      }
      for (const auto& t : w.tanks) {
        CHECK(t.pose.heading >= 0.0);
        CHECK(t.pose.heading < kTwoPi);
        for (const auto& o : w.obstacles) {
          CHECK(distance(t.pose.position(), o.center.position()) >= r + o.radius + 1.0);
        }
        for (const auto& u : w.tanks) {
          if (t.id == u.id) continue;
          CHECK(distance(t.pose.position(), u.pose.position()) >= 2 * r + 1.0);
        }
      }
    }
  }

  TEST_CASE("impossible layouts report an overcrowded arena") {
    WorldSpec spec{40, 0, 0.0, {}};
    spec.physics.arena_side = 20.0;
    try {
      spawn_world(spec, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ArenaOvercrowded);
    }
  }

  TEST_CASE("integrate: zero action leaves the pose unchanged") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 1.0}, true, 0};
    const TankState u = integrate_tank(t, {0, 0, 0}, ph);
    CHECK(u.pose == t.pose);
  }

  TEST_CASE("integrate: full throttle advances 0.5 units along the heading") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 0.0}, true, 0};
    const TankState u = integrate_tank(t, {1, 0, 0}, ph);
    // Heading 0 faces +y: 1 (throttle) x 5 u/s x 0.1 s = 0.5 u.
    CHECK(u.pose.x == doctest::Approx(10.0));
    CHECK(u.pose.y == doctest::Approx(20.5));
  }

  TEST_CASE("integrate: full steer turns by 0.05 pi") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 0.0}, true, 0};
    const TankState u = integrate_tank(t, {0, 1, 0}, ph);
    CHECK(u.pose.heading == doctest::Approx(0.05 * std::numbers::pi));
    CHECK(u.pose.x == 10.0);
    CHECK(u.pose.y == 20.0);
  }

  TEST_CASE("integrate: heading updates before translation") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 0.0}, true, 0};
    const TankState u = integrate_tank(t, {1, 1, 0}, ph);
    const double h = 0.05 * std::numbers::pi;
    CHECK(u.pose.x == doctest::Approx(10.0 - 0.5 * std::sin(h)));
    CHECK(u.pose.y == doctest::Approx(20.0 + 0.5 * std::cos(h)));
  }

  TEST_CASE("integrate: negative steer wraps the heading") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 0.0}, true, 0};
    const TankState u = integrate_tank(t, {0, -1, 0}, ph);
    CHECK(u.pose.heading == doctest::Approx(kTwoPi - 0.05 * std::numbers::pi));
  }

  TEST_CASE("fire_control: zero is not a shot") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 0.0}, true, 0};
    CHECK_FALSE(fire_control(t, 0.0, ph).has_value());
    CHECK(t.reload_remaining == 0);
  }

  TEST_CASE("fire_control: positive fire spawns at the nose and reloads") {
    const PhysicsParams ph;
    TankState t{3, Team::Red, {10, 20, 0.0}, true, 0};
    const auto p = fire_control(t, 0.5, ph);
    REQUIRE(p.has_value());
    CHECK(p->shooter_id == 3);
    CHECK(p->pose.x == doctest::Approx(10.0));
    CHECK(p->pose.y == doctest::Approx(20.0 + ph.tank_radius));
    CHECK(p->pose.heading == 0.0);
    CHECK(t.reload_remaining == ph.reload_interval);
  }

  TEST_CASE("fire_control: reloading blocks the shot") {
    const PhysicsParams ph;
    TankState t{0, Team::Red, {10, 20, 0.0}, true, 3};
    CHECK_FALSE(fire_control(t, 1.0, ph).has_value());
    CHECK(t.reload_remaining == 3);
  }

  TEST_CASE("step: zero actions only advance the clock") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 20, 20}, {Team::Blue, 80, 80}});
    w.tanks[0].reload_remaining = 4;
    const auto out = step_world(w, zero_actions(w), ph);
    CHECK(out.state.tick == 1);
    CHECK(out.events.empty());
    CHECK(out.state.tanks[0].pose == w.tanks[0].pose);
    CHECK(out.state.tanks[1].pose == w.tanks[1].pose);
    CHECK(out.state.tanks[0].reload_remaining == 3);
  }

  TEST_CASE("step: a projectile next to an enemy kills it") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 50, 50, 0.0}, {Team::Blue, 50, 53.5, 0.0}});
    ActionMap a = zero_actions(w);
    a[0].fire = 1.0;
    const auto out = step_world(w, a, ph);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].shooter_id == 0);
    CHECK(out.events[0].victim_id == 1);
    CHECK(out.events[0].shooter_team == Team::Red);
    CHECK(out.events[0].victim_team == Team::Blue);
    CHECK(out.events[0].tick == 0);
    CHECK_FALSE(out.state.tanks[1].alive);
    CHECK(out.state.projectiles.empty());
  }

  TEST_CASE("step: a tank at the wall driving outward is clamped") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 50, 98.4, 0.0}, {Team::Blue, 10, 10}});
    ActionMap a = zero_actions(w);
    a[0].throttle = 1.0;
    const auto out = step_world(w, a, ph);
    CHECK(out.state.tanks[0].pose.y == doctest::Approx(100.0 - ph.tank_radius));
  }

  TEST_CASE("step: a missing action is rejected") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 20, 20}, {Team::Blue, 80, 80}, {Team::Neutral, 50, 50}});
    ActionMap a;
    a[0] = {};
    try {
      step_world(w, a, ph);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IncompleteActionMap);
    }
    a[1] = {};
    CHECK_NOTHROW(step_world(w, a, ph));  // neutrals may be omitted
  }

  TEST_CASE("step: tie between two victims goes to the smaller id") {
    const PhysicsParams ph;
    // Both targets straddle the projectile's first segment symmetrically.
    WorldState w = make_world({{Team::Red, 50, 50, 0.0}, {Team::Blue, 51.5, 53.0, 0.0}, {Team::Blue, 48.5, 53.0, 0.0}});
    ActionMap a = zero_actions(w);
    a[0].fire = 1.0;
    const auto out = step_world(w, a, ph);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].victim_id == 1);
  }

  TEST_CASE("step: a projectile never hits its shooter") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 50, 50, 0.0}, {Team::Blue, 10, 10}});
    ActionMap a = zero_actions(w);
    a[0].fire = 1.0;
    a[0].throttle = 1.0;
    WorldState s = w;
    for (int i = 0; i < 30; ++i) {
      auto out = step_world(s, a, ph);
      CHECK(out.events.empty());
      s = out.state;
    }
    CHECK(s.tanks[0].alive);
  }

  TEST_CASE("step: projectiles travel 50 units and expire") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 50, 10, 0.0}, {Team::Blue, 5, 90}}, 200.0);
    ActionMap a = zero_actions(w);
    a[0].fire = 1.0;
    auto out = step_world(w, a, ph);
    REQUIRE(out.state.projectiles.size() == 1);
    a[0].fire = -1.0;
    WorldState s = out.state;
    int alive_ticks = 1;
    while (!s.projectiles.empty()) {
      s = step_world(s, a, ph).state;
      ++alive_ticks;
      REQUIRE(alive_ticks <= 100);
    }
    CHECK(alive_ticks == ph.projectile_lifetime);
  }

  TEST_CASE("step: reach is nose offset plus 50 units plus the hit radius") {
    const PhysicsParams ph;
    // Launch 1.5 ahead of the centre, 25 segments of 2 u, hit radius 2:
    // targets up to 53.5 ahead are reachable.
    for (const auto& [gap, expect_hit] : {std::pair{53.0, true}, std::pair{54.0, false}}) {
      WorldState w = make_world({{Team::Red, 100, 20, 0.0}, {Team::Blue, 100, 20 + gap}}, 200.0);
      ActionMap a = zero_actions(w);
      a[0].fire = 1.0;
      bool hit = false;
      for (int i = 0; i < 40 && !hit; ++i) {
        auto out = step_world(w, a, ph);
        hit = !out.events.empty();
        w = out.state;
        a[0].fire = -1.0;
      }
      CHECK(hit == expect_hit);
    }
  }

  TEST_CASE("step: friendly fire and neutral fire are possible") {
    const PhysicsParams ph;
    WorldState w = make_world({{Team::Red, 50, 50, 0.0}, {Team::Red, 50, 53.5}, {Team::Blue, 10, 10}});
    ActionMap a = zero_actions(w);
    a[0].fire = 1.0;
    auto out = step_world(w, a, ph);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].victim_team == Team::Red);

    WorldState n = make_world({{Team::Red, 50, 50, 0.0}, {Team::Blue, 10, 10}, {Team::Neutral, 50, 53.5}});
    ActionMap b = zero_actions(n);
    b[0].fire = 1.0;
    out = step_world(n, b, ph);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].victim_team == Team::Neutral);
  }

  TEST_CASE("property: physics invariants under random actions") {
    const PhysicsParams ph;
    WorldSpec spec{5, 2, 0.5, ph};
    Rng rng(1234);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      WorldState s = spawn_world(spec, seed);
      const auto obstacles = s.obstacles;
      const std::size_t n_tanks = s.tanks.size();
      for (int tick = 0; tick < 300; ++tick) {
        const ActionMap actions = random_actions(s, rng);
        const auto before = s;
        auto out = step_world(s, actions, ph);
        CHECK(step_world(before, actions, ph).state.hash() == out.state.hash());
        s = std::move(out.state);
        REQUIRE(s.tanks.size() == n_tanks);
        CHECK(s.obstacles.size() == obstacles.size());
        for (std::size_t i = 0; i < n_tanks; ++i) {
          const auto& t = s.tanks[i];
          const auto& b = before.tanks[i];
          if (!b.alive) {
            CHECK_FALSE(t.alive);
            CHECK(t.pose == b.pose);
          }
          CHECK(t.pose.x >= ph.tank_radius);
          CHECK(t.pose.x <= s.arena_side - ph.tank_radius);
          CHECK(t.pose.y >= ph.tank_radius);
          CHECK(t.pose.y <= s.arena_side - ph.tank_radius);
          CHECK(t.reload_remaining >= 0);
          CHECK(t.reload_remaining <= ph.reload_interval);
        }
        for (const auto& p : s.projectiles) CHECK(p.age < ph.projectile_lifetime);
        for (const auto& e : out.events) {
          CHECK(before.tanks[e.victim_id].alive);
          CHECK_FALSE(s.tanks[e.victim_id].alive);
          CHECK(e.shooter_id != e.victim_id);
        }
      }
    }
  }

  TEST_CASE("property: shot gating under action fuzzing") {
    const PhysicsParams ph;
    WorldSpec spec{5, 2, 0.5, ph};
    Rng rng(4321);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WorldState s = spawn_world(spec, seed);
      std::vector<std::vector<std::uint64_t>> shots(s.tanks.size());
      for (int tick = 0; tick < 300; ++tick) {
        ActionMap actions = random_actions(s, rng);
        // Bias toward the boundary values.
        for (auto& [id, a] : actions) {
          const double u = rng.uniform();
          if (u < 0.2) a.fire = 0.0;
          else if (u < 0.3) a.fire = 1e-9;
        }
        WorldState next = step_world(s, actions, ph).state;
        const auto fired = spawned_this_tick(s, next, ph);
        s = std::move(next);
        for (const auto& id : fired) {
          CHECK(actions.at(id).fire > 0.0);
          shots[id].push_back(s.tick);
        }
      }
      for (const auto& list : shots) {
        for (std::size_t k = 1; k < list.size(); ++k) {
          CHECK(list[k] - list[k - 1] >= static_cast<std::uint64_t>(ph.reload_interval));
        }
      }
    }
  }

  TEST_CASE("property: without contact displacement never exceeds max_speed * dt") {
    const PhysicsParams ph;
    Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
      WorldState w = make_world({{Team::Red, rng.uniform(20, 80), rng.uniform(20, 80), rng.uniform(0, kTwoPi)},
                                 {Team::Blue, 5, 5}});
      ActionMap a = random_actions(w, rng);
      a[0].fire = -1;
      a[1].fire = -1;
      const auto out = step_world(w, a, ph);
      CHECK(distance(out.state.tanks[0].pose.position(), w.tanks[0].pose.position()) <= ph.max_speed * ph.dt + 1e-12);
    }
  }

  TEST_CASE("property: bodies are separated after each step") {
    const PhysicsParams ph;
    WorldSpec spec{5, 2, 1.0, ph};
    Rng rng(99);
    constexpr double kTol = 1e-6;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      WorldState s = spawn_world(spec, seed);
      for (int tick = 0; tick < 300; ++tick) {
        ActionMap a = random_actions(s, rng);
        for (auto& [id, act] : a) act.fire = -1;
        s = step_world(s, a, ph).state;
        for (const auto& t : s.tanks) {
          if (!t.alive) continue;
          for (const auto& u : s.tanks) {
            if (u.id <= t.id || !u.alive) continue;
            CHECK(distance(t.pose.position(), u.pose.position()) >= 2 * ph.tank_radius - kTol);
          }
          for (const auto& o : s.obstacles) {
            CHECK(distance(t.pose.position(), o.center.position()) >= ph.tank_radius + o.radius - kTol);
          }
        }
      }
    }
  }

  TEST_CASE("action clamping handles out-of-range and NaN") {
    const Action a = Action{7, -3, std::nan("")}.clamped();
    CHECK(a.throttle == 1.0);
    CHECK(a.steer == -1.0);
    CHECK(a.fire == 0.0);
  }
}
