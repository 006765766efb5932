#pragma once

#include <map>
#include <span>
#include <vector>

#include "tanksworld/world.hpp"

namespace tanksworld {

struct RewardComponents {
  int enemy_kills = 0;
  int ally_kills = 0;
  int neutral_kills = 0;
  int died = 0;  // 0 or 1

  RewardComponents& operator+=(const RewardComponents& o);
  bool is_zero() const { return enemy_kills == 0 && ally_kills == 0 && neutral_kills == 0 && died == 0; }
  friend bool operator==(const RewardComponents&, const RewardComponents&) = default;
};

struct RewardWeights {
  double w_enemy = 1.0;
  double w_death = -1.0;
  double w_ally = -1.0;
  double w_neutral = -1.0;

  RewardWeights scaled(double factor) const {
    return {w_enemy * factor, w_death * factor, w_ally * factor, w_neutral * factor};
  }
};

/// Per-tank component deltas for one tick's kill events. Victims get
/// died = 1; red/blue shooters are credited by the victim's team;
/// neutral shooters earn nothing.
std::map<TankId, RewardComponents> accumulate(std::span<const KillEvent> events);

double scalarize(const RewardComponents& c, const RewardWeights& w);

/// enemy_kills - died - neutral_kills summed over the team's tanks, minus
/// ally_kills too when `include_ally_kills`. `components` and `teams` are
/// indexed by tank id.
int team_score(std::span<const RewardComponents> components, std::span<const Team> teams, Team team,
               bool include_ally_kills = false);

/// Episode-cumulative components for every tank.
class Scoreboard {
 public:
  Scoreboard() = default;
  explicit Scoreboard(const WorldState& state);

  /// Applies one tick's events and returns the per-tank deltas (indexed by id).
  std::vector<RewardComponents> apply(std::span<const KillEvent> events);

  const std::vector<RewardComponents>& totals() const { return totals_; }
  const std::vector<Team>& teams() const { return teams_; }
  int team_score(Team team, bool include_ally_kills = false) const {
    return tanksworld::team_score(totals_, teams_, team, include_ally_kills);
  }

 private:
  std::vector<RewardComponents> totals_;
  std::vector<Team> teams_;
};

}  // namespace tanksworld
