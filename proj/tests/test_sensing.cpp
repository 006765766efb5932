#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "tanksworld/sensing.hpp"

using namespace tanksworld;
using namespace tanksworld::testing;

namespace {

void check_against_oracle(const WorldState& w, const SensingOptions& opt) {
  for (const auto& t : w.tanks) {
    if (!t.alive || t.team == Team::Neutral) continue;
    const auto got = visibility_sets(w, t.id, opt);
    const auto want = oracle_visibility(w, t.id, opt.comm_range, opt.two_hop_only ? 1 : -1,
                                        opt.neutral_always_visible);
    CHECK(got.visible_enemies == want.enemies);
    CHECK(got.visible_neutrals == want.neutrals);
  }
}

}  // namespace

TEST_SUITE("sensing") {
  TEST_CASE("a chain of allies forms one component") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Red, 35, 10}, {Team::Red, 60, 10}});
    const auto g = ally_components(w, Team::Red, 30.0);
    REQUIRE(g.components.size() == 1);
    CHECK(g.components[0] == std::vector<TankId>{0, 1, 2});
  }

  TEST_CASE("allies 40 units apart stay separate") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Red, 50, 10}});
    const auto g = ally_components(w, Team::Red, 30.0);
    REQUIRE(g.components.size() == 2);
    CHECK(g.component_of(0) != g.component_of(1));
  }

  TEST_CASE("component_of is -1 for dead and foreign tanks") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Red, 12, 10, 0, false}, {Team::Blue, 14, 10}});
    const auto g = ally_components(w, Team::Red, 30.0);
    CHECK(g.component_of(0) == 0);
    CHECK(g.component_of(1) == -1);
    CHECK(g.component_of(2) == -1);
  }

  TEST_CASE("relay reveals an enemy out of direct range") {
    // Blue 2 sees red 1 only through blue 3; red 0 is beyond every blue.
    const auto w = make_world({{Team::Red, 20, 90}, {Team::Red, 70, 50}, {Team::Blue, 20, 50}, {Team::Blue, 45, 50}});
    const SensingOptions opt;
    CHECK(visibility_sets(w, 2, opt).visible_enemies == std::vector<TankId>{1});
    CHECK(visibility_sets(w, 3, opt).visible_enemies == std::vector<TankId>{1});
    CHECK(visibility_sets(w, 1, opt).visible_enemies == std::vector<TankId>{3});
    CHECK(visibility_sets(w, 0, opt).visible_enemies.empty());
  }

  TEST_CASE("full comm range sees everything") {
    Rng rng(3);
    const auto w = random_layout(rng, 5, 2, 100.0);
    SensingOptions opt;
    opt.comm_range = 100.0 * std::sqrt(2.0) + 1.0;
    for (const auto& t : w.tanks) {
      if (!t.alive || t.team == Team::Neutral) continue;
      const auto v = visibility_sets(w, t.id, opt);
      for (const auto& o : w.tanks) {
        if (!o.alive || o.team == t.team) continue;
        const auto& list = o.team == Team::Neutral ? v.visible_neutrals : v.visible_enemies;
        CHECK(std::count(list.begin(), list.end(), o.id) == 1);
      }
    }
  }

  TEST_CASE("a dead ally does not relay") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Red, 35, 10, 0, false}, {Team::Blue, 60, 10}});
    CHECK(visibility_sets(w, 0, SensingOptions{}).visible_enemies.empty());
  }

  TEST_CASE("dead enemies are never visible") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Blue, 12, 10, 0, false}});
    CHECK(visibility_sets(w, 0, SensingOptions{}).visible_enemies.empty());
  }

  TEST_CASE("two-hop mode stops after one relay") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Red, 35, 10}, {Team::Red, 60, 10}, {Team::Blue, 85, 10}});
    SensingOptions opt;
    CHECK(visibility_sets(w, 0, opt).visible_enemies == std::vector<TankId>{3});
    opt.two_hop_only = true;
    CHECK(visibility_sets(w, 0, opt).visible_enemies.empty());
    CHECK(visibility_sets(w, 1, opt).visible_enemies == std::vector<TankId>{3});
  }

  TEST_CASE("neutral_always_visible exposes distant neutrals") {
    const auto w = make_world({{Team::Red, 10, 10}, {Team::Neutral, 90, 90}});
    SensingOptions opt;
    CHECK(visibility_sets(w, 0, opt).visible_neutrals.empty());
    opt.neutral_always_visible = true;
    CHECK(visibility_sets(w, 0, opt).visible_neutrals == std::vector<TankId>{1});
  }

  TEST_CASE("dead or neutral observers throw ObserverDead") {
    const auto w = make_world({{Team::Red, 10, 10, 0, false}, {Team::Neutral, 20, 20}});
    for (TankId id : {TankId{0}, TankId{1}}) {
      try {
        visibility_sets(w, id, SensingOptions{});
        FAIL("expected ObserverDead");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ObserverDead);
      }
    }
  }

  TEST_CASE("components agree with the matrix-closure oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const auto w = random_layout(rng, 5, 2, 100.0);
      const double range = rng.uniform(5, 60);
      for (Team team : {Team::Red, Team::Blue}) {
        CHECK(ally_components(w, team, range).components == oracle_components(w, team, range));
      }
    }
  }

  TEST_CASE("visibility agrees with the relay-chain oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
      const auto w = random_layout(rng, 5, 2, 100.0);
      SensingOptions opt;
      opt.comm_range = rng.uniform(5, 60);
      opt.two_hop_only = trial % 3 == 1;
      opt.neutral_always_visible = trial % 5 == 2;
      check_against_oracle(w, opt);
    }
  }

  TEST_CASE("visibility_all matches per-tank queries") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      const auto w = random_layout(rng, 5, 2, 100.0);
      SensingOptions opt;
      opt.comm_range = rng.uniform(10, 50);
      opt.two_hop_only = trial % 2 == 1;
      const auto all = visibility_all(w, opt);
      REQUIRE(all.size() == w.tanks.size());
      for (const auto& t : w.tanks) {
        if (!t.alive || t.team == Team::Neutral) {
          CHECK(all[t.id].visible_enemies.empty());
          CHECK(all[t.id].visible_neutrals.empty());
          continue;
        }
        CHECK(all[t.id] == visibility_sets(w, t.id, opt));
      }
    }
  }

  TEST_CASE("property: members of one component share awareness") {
    Rng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
      const auto w = random_layout(rng, 5, 2, 100.0);
      SensingOptions opt;
      opt.comm_range = rng.uniform(10, 50);
      for (Team team : {Team::Red, Team::Blue}) {
        for (const auto& comp : ally_components(w, team, opt.comm_range).components) {
          const auto first = visibility_sets(w, comp.front(), opt);
          for (TankId m : comp) {
            const auto v = visibility_sets(w, m, opt);
            CHECK(v.visible_enemies == first.visible_enemies);
            CHECK(v.visible_neutrals == first.visible_neutrals);
          }
        }
      }
    }
  }

  TEST_CASE("property: mutual direct sight is symmetric") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
      const auto w = random_layout(rng, 5, 0, 100.0);
      SensingOptions opt;
      opt.comm_range = rng.uniform(5, 40);
      opt.two_hop_only = true;
      for (const auto& a : w.tanks) {
        for (const auto& b : w.tanks) {
          if (!a.alive || !b.alive || a.team == b.team) continue;
          if (std::hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y) > opt.comm_range) continue;
          const auto va = visibility_sets(w, a.id, opt).visible_enemies;
          const auto vb = visibility_sets(w, b.id, opt).visible_enemies;
          CHECK(std::count(va.begin(), va.end(), b.id) == 1);
          CHECK(std::count(vb.begin(), vb.end(), a.id) == 1);
        }
      }
    }
  }

  TEST_CASE("property: growing the range never hides anything") {
    Rng rng(16);
    for (int trial = 0; trial < 100; ++trial) {
      const auto w = random_layout(rng, 5, 2, 100.0);
      SensingOptions lo, hi;
      lo.comm_range = rng.uniform(5, 40);
      hi.comm_range = lo.comm_range + rng.uniform(0, 20);
      for (const auto& t : w.tanks) {
        if (!t.alive || t.team == Team::Neutral) continue;
        const auto a = visibility_sets(w, t.id, lo);
        const auto b = visibility_sets(w, t.id, hi);
        CHECK(std::includes(b.visible_enemies.begin(), b.visible_enemies.end(), a.visible_enemies.begin(),
                            a.visible_enemies.end()));
        CHECK(std::includes(b.visible_neutrals.begin(), b.visible_neutrals.end(), a.visible_neutrals.begin(),
                            a.visible_neutrals.end()));
      }
    }
  }

  TEST_CASE("property: the observer never appears in its own sets") {
    Rng rng(17);
    const auto w = random_layout(rng, 5, 2, 50.0);
    for (const auto& t : w.tanks) {
      if (!t.alive || t.team == Team::Neutral) continue;
      const auto v = visibility_sets(w, t.id, SensingOptions{});
      CHECK(v.observer_id == t.id);
      CHECK(std::count(v.visible_enemies.begin(), v.visible_enemies.end(), t.id) == 0);
    }
  }
}
