#include "tanksworld/sensing.hpp"

#include <algorithm>
#include <numeric>

namespace tanksworld {

namespace {

bool within(const TankState& a, const TankState& b, double range) {
  return norm_sq(a.pose.position() - b.pose.position()) <= range * range;
}

// Union-find over tank ids.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;  // root is always the smallest id
  }

 private:
  std::vector<std::size_t> parent_;
};

// Alive allies that relay for `observer` (itself included).
std::vector<TankId> relay_group(const WorldState& state, const TankState& observer, const SensingOptions& options) {
  std::vector<TankId> group;
  if (options.two_hop_only) {
    for (const auto& t : state.tanks) {
      if (t.alive && t.team == observer.team && within(t, observer, options.comm_range)) group.push_back(t.id);
    }
    return group;
  }
  const CommGraph graph = ally_components(state, observer.team, options.comm_range);
  return graph.components.at(static_cast<std::size_t>(graph.component_of(observer.id)));
}

VisibilitySet visible_from(const WorldState& state, TankId observer, const std::vector<TankId>& group,
                           const SensingOptions& options) {
  const Team team = state.tanks.at(observer).team;
  VisibilitySet vis;
  vis.observer_id = observer;
  for (const auto& t : state.tanks) {
    if (!t.alive || t.team == team) continue;
    const bool neutral = t.team == Team::Neutral;
    bool seen = neutral && options.neutral_always_visible;
    for (std::size_t i = 0; i < group.size() && !seen; ++i) {
      seen = within(state.tanks[group[i]], t, options.comm_range);
    }
    if (!seen) continue;
    (neutral ? vis.visible_neutrals : vis.visible_enemies).push_back(t.id);
  }
  return vis;
}

const TankState& require_observer(const WorldState& state, TankId id) {
  if (id >= state.tanks.size()) throw Error(ErrorKind::ObserverDead, "unknown observer " + std::to_string(id));
  const TankState& t = state.tanks[id];
  if (!t.alive) throw Error(ErrorKind::ObserverDead, "observer dead: tank " + std::to_string(id));
  if (t.team == Team::Neutral) {
    throw Error(ErrorKind::ObserverDead, "neutral tank " + std::to_string(id) + " has no sensing");
  }
  return t;
}

}  // namespace

int CommGraph::component_of(TankId id) const {
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (std::binary_search(components[c].begin(), components[c].end(), id)) return static_cast<int>(c);
  }
  return -1;
}

CommGraph ally_components(const WorldState& state, Team team, double comm_range) {
  CommGraph graph;
  graph.team = team;
  graph.comm_range = comm_range;

  DisjointSets sets(state.tanks.size());
  for (std::size_t i = 0; i < state.tanks.size(); ++i) {
    const auto& a = state.tanks[i];
    if (!a.alive || a.team != team) continue;
    for (std::size_t j = i + 1; j < state.tanks.size(); ++j) {
      const auto& b = state.tanks[j];
      if (b.alive && b.team == team && within(a, b, comm_range)) sets.unite(i, j);
    }
  }
  // Roots are the smallest member, so scanning ids in order emits
  // components already sorted by smallest member.
  std::vector<int> slot(state.tanks.size(), -1);
  for (std::size_t i = 0; i < state.tanks.size(); ++i) {
    const auto& t = state.tanks[i];
    if (!t.alive || t.team != team) continue;
    const std::size_t root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(graph.components.size());
      graph.components.emplace_back();
    }
    graph.components[static_cast<std::size_t>(slot[root])].push_back(t.id);
  }
  return graph;
}

VisibilitySet visibility_sets(const WorldState& state, TankId tank_id, const SensingOptions& options) {
  const TankState& observer = require_observer(state, tank_id);
  return visible_from(state, tank_id, relay_group(state, observer, options), options);
}

std::vector<VisibilitySet> visibility_all(const WorldState& state, const SensingOptions& options) {
  std::vector<VisibilitySet> out(state.tanks.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].observer_id = static_cast<TankId>(i);

  if (options.two_hop_only) {
    for (const auto& t : state.tanks) {
      if (t.alive && t.team != Team::Neutral) out[t.id] = visibility_sets(state, t.id, options);
    }
    return out;
  }
  for (Team team : {Team::Red, Team::Blue}) {
    const CommGraph graph = ally_components(state, team, options.comm_range);
    for (const auto& component : graph.components) {
      const VisibilitySet shared = visible_from(state, component.front(), component, options);
      for (TankId id : component) {
        out[id] = shared;
        out[id].observer_id = id;
      }
    }
  }
  return out;
}

}  // namespace tanksworld
