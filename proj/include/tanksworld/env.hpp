#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <memory>
#include <vector>

#include "tanksworld/config.hpp"
#include "tanksworld/observation.hpp"
#include "tanksworld/policies.hpp"
#include "tanksworld/scoring.hpp"
#include "tanksworld/sensing.hpp"
#include "tanksworld/world.hpp"

namespace tanksworld {

struct TerminalStatus {
  enum class Kind { Running, TeamEliminated, MaxSteps };
  Kind kind = Kind::Running;
  Team team = Team::Neutral;  // eliminated team, for TeamEliminated

  bool done() const { return kind != Kind::Running; }
  friend bool operator==(const TerminalStatus&, const TerminalStatus&) = default;
};

/// Red elimination is reported before blue when both fall on the same tick.
TerminalStatus is_terminal(const WorldState& state, std::uint64_t tick, const EnvConfig& config);

/// Actions are committed at this resolution so a 6-digit trajectory log
/// replays bit-exactly.
inline constexpr double kActionSteps = 1'000'000.0;
Action quantize_action(const Action& action);

struct AgentStep {
  TankId id = 0;
  /// False when the tank died on this step. Its observation is then blank
  /// and it is omitted from later results.
  bool alive = true;
  std::shared_ptr<const Observation> observation;
  RewardComponents reward_components;
  double scalar_reward = 0.0;
};

struct StepInfo {
  std::uint64_t tick = 0;
  int alive_red = 0;
  int alive_blue = 0;
  int alive_neutral = 0;
  int red_score = 0;
  int blue_score = 0;
  TerminalStatus status;
};

struct StepResult {
  std::vector<AgentStep> agents;  // external tanks, ascending id
  bool done = false;
  StepInfo info;
  std::vector<KillEvent> events;
};

struct EnvOptions {
  /// Render observations for external tanks. Scripted and clone policies
  /// that read observations are always served.
  bool render_observations = true;
  /// Build no policies; only step_all() drives the world.
  bool replay_mode = false;
};

class Env {
 public:
  explicit Env(EnvConfig config, EnvOptions options = {});

  StepResult reset();
  StepResult reset(std::uint64_t seed);

  /// Advances one tick. `external_actions` must cover every alive external
  /// tank; entries for other tanks are ignored. On error the env is
  /// unchanged.
  StepResult step(const ActionMap& external_actions);
  /// Drives every tank from `all_actions` (missing entries act as zero),
  /// bypassing all policies. Used by replay.
  StepResult step_all(const ActionMap& all_actions);

  const EnvConfig& config() const { return config_; }
  const WorldState& state() const { return world_; }
  std::uint64_t seed() const { return seed_; }
  bool done() const { return status_.done(); }
  TerminalStatus status() const { return status_; }
  const std::vector<TankId>& external_tanks() const { return external_; }
  bool is_external(TankId id) const;

  /// Actions applied on the last step, indexed by id (zero for dead tanks).
  const std::vector<Action>& last_actions() const { return last_actions_; }
  const Scoreboard& scoreboard() const { return scoreboard_; }
  const std::vector<KillEvent>& event_log() const { return event_log_; }
  const VisibilitySet& visibility(TankId id) const { return visibility_.at(id); }
  /// Current observation of an alive red/blue tank, rendering on demand.
  std::shared_ptr<const Observation> observation(TankId id);
  StepInfo info() const;

 private:
  StepResult advance(const std::vector<Action>& actions, const std::vector<bool>& was_alive);
  void refresh_perception();
  bool wants_observation(TankId id) const;
  void require_running() const;

  EnvConfig config_;
  EnvOptions options_;
  PolicyContext policy_ctx_;
  CloneModelCache model_cache_;
  std::uint64_t seed_ = 0;
  bool has_reset_ = false;

  WorldState world_;
  Scoreboard scoreboard_;
  TerminalStatus status_;
  std::vector<TankId> external_;
  std::vector<std::unique_ptr<Policy>> policies_;  // null for external tanks
  std::vector<Rng> rngs_;
  std::vector<VisibilitySet> visibility_;
  std::vector<std::shared_ptr<Observation>> observations_;
  std::vector<bool> observation_fresh_;
  std::vector<Action> last_actions_;
  std::vector<KillEvent> event_log_;
};

/// Uniform random actions for alive external tanks, one Driver stream per
/// tank derived from the env's episode seed.
class RandomDriver {
 public:
  explicit RandomDriver(const Env& env);
  ActionMap act(const Env& env);

 private:
  std::vector<Rng> rngs_;
};

struct EpisodeSummary {
  std::uint64_t seed = 0;
  std::uint64_t ticks = 0;
  int red_score = 0;
  int blue_score = 0;
  TerminalStatus status;
  RewardComponents red_totals;
  RewardComponents blue_totals;
};

EpisodeSummary summarize(const Env& env);
std::string_view status_name(const TerminalStatus& status);

/// Drives an env that was just reset until the episode ends, external
/// tanks playing RandomDriver actions. `after_step` runs after every tick.
EpisodeSummary play_out(Env& env, const std::function<void()>& after_step = {});

/// Steps K independent environments concurrently; each keeps its own
/// deterministic trajectory.
class VecEnv {
 public:
  VecEnv(const std::vector<EnvConfig>& configs, EnvOptions options = {});

  std::vector<StepResult> reset(const std::vector<std::uint64_t>& seeds);
  std::vector<StepResult> step(const std::vector<ActionMap>& actions);
  std::size_t size() const { return envs_.size(); }
  Env& at(std::size_t i) { return *envs_.at(i); }

 private:
  std::vector<std::unique_ptr<Env>> envs_;
};

}  // namespace tanksworld
