#include "tanksworld/scoring.hpp"

#include <algorithm>

namespace tanksworld {

RewardComponents& RewardComponents::operator+=(const RewardComponents& o) {
  enemy_kills += o.enemy_kills;
  ally_kills += o.ally_kills;
  neutral_kills += o.neutral_kills;
  died = std::min(1, died + o.died);
  return *this;
}

std::map<TankId, RewardComponents> accumulate(std::span<const KillEvent> events) {
  std::map<TankId, RewardComponents> out;
  for (const auto& e : events) {
    out[e.victim_id].died = 1;
    if (e.shooter_team == Team::Neutral) continue;
    auto& shooter = out[e.shooter_id];
    if (e.victim_team == Team::Neutral) {
      ++shooter.neutral_kills;
    } else if (e.victim_team == e.shooter_team) {
      ++shooter.ally_kills;
    } else {
      ++shooter.enemy_kills;
    }
  }
  return out;
}

double scalarize(const RewardComponents& c, const RewardWeights& w) {
  return w.w_enemy * c.enemy_kills + w.w_death * c.died + w.w_ally * c.ally_kills + w.w_neutral * c.neutral_kills;
}

int team_score(std::span<const RewardComponents> components, std::span<const Team> teams, Team team,
               bool include_ally_kills) {
  int score = 0;
  for (std::size_t i = 0; i < components.size() && i < teams.size(); ++i) {
    if (teams[i] != team) continue;
    const auto& c = components[i];
    score += c.enemy_kills - c.died - c.neutral_kills;
    if (include_ally_kills) score -= c.ally_kills;
  }
  return score;
}

Scoreboard::Scoreboard(const WorldState& state) : totals_(state.tanks.size()), teams_(state.tanks.size()) {
  for (const auto& t : state.tanks) teams_[t.id] = t.team;
}

std::vector<RewardComponents> Scoreboard::apply(std::span<const KillEvent> events) {
  std::vector<RewardComponents> deltas(totals_.size());
  for (const auto& [id, delta] : accumulate(events)) {
    deltas.at(id) = delta;
    totals_.at(id) += delta;
  }
  return deltas;
}

}  // namespace tanksworld
