#include "tanksworld/env.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace tanksworld {

Action quantize_action(const Action& action) {
  const Action c = action.clamped();
  // Division by 1e6 rather than multiplication by 1e-6 gives the double
  // nearest to n/10^6, which is also what parsing "%.6f" text yields.
  auto q = [](double v) { return static_cast<double>(std::llround(v * kActionSteps)) / kActionSteps; };
  return {q(c.throttle), q(c.steer), q(c.fire)};
}

TerminalStatus is_terminal(const WorldState& state, std::uint64_t tick, const EnvConfig& config) {
  bool red_alive = false;
  bool blue_alive = false;
  for (const auto& t : state.tanks) {
    if (!t.alive) continue;
    red_alive |= t.team == Team::Red;
    blue_alive |= t.team == Team::Blue;
  }
  if (!red_alive) return {TerminalStatus::Kind::TeamEliminated, Team::Red};
  if (!blue_alive) return {TerminalStatus::Kind::TeamEliminated, Team::Blue};
  if (tick >= static_cast<std::uint64_t>(config.max_steps)) return {TerminalStatus::Kind::MaxSteps, Team::Neutral};
  return {};
}

Env::Env(EnvConfig config, EnvOptions options)
    : config_(std::move(config)), options_(options), policy_ctx_(PolicyContext::from(config_.physics)) {
  config_.validate();
}

bool Env::is_external(TankId id) const { return std::binary_search(external_.begin(), external_.end(), id); }

StepResult Env::reset() { return reset(config_.seed); }

StepResult Env::reset(std::uint64_t seed) {
  WorldState world = spawn_world(config_.world_spec(), seed);
  const std::size_t n = world.tanks.size();

  std::vector<TankId> external;
  std::vector<std::unique_ptr<Policy>> policies(n);
  std::vector<Rng> rngs(n);
  for (const auto& t : world.tanks) {
    if (t.team == Team::Neutral) {
      rngs[t.id] = Rng(derive_stream_seed(seed, Stream::NeutralDriver, t.id));
      if (!options_.replay_mode) policies[t.id] = make_neutral_driver();
      continue;
    }
    const ControlSpec spec = config_.control_for(t.id);
    if (spec.kind == ControlSpec::Kind::External) {
      external.push_back(t.id);
      continue;
    }
    rngs[t.id] = Rng(derive_stream_seed(seed, Stream::Policy, t.id));
    if (!options_.replay_mode) policies[t.id] = make_policy(spec, policy_ctx_, &model_cache_);
  }

  seed_ = seed;
  world_ = std::move(world);
  scoreboard_ = Scoreboard(world_);
  status_ = {};
  external_ = std::move(external);
  policies_ = std::move(policies);
  rngs_ = std::move(rngs);
  observations_.assign(n, nullptr);
  observation_fresh_.assign(n, false);
  last_actions_.assign(n, Action{});
  event_log_.clear();
  has_reset_ = true;
  refresh_perception();
  status_ = is_terminal(world_, world_.tick, config_);

  StepResult result;
  result.info = info();
  result.done = status_.done();
  for (TankId id : external_) {
    AgentStep agent;
    agent.id = id;
    if (options_.render_observations) agent.observation = observation(id);
    result.agents.push_back(std::move(agent));
  }
  return result;
}

void Env::require_running() const {
  if (!has_reset_) throw Error(ErrorKind::EpisodeFinished, "env has not been reset");
  if (status_.done()) throw Error(ErrorKind::EpisodeFinished, "episode finished");
}

bool Env::wants_observation(TankId id) const {
  const auto& t = world_.tanks[id];
  if (!t.alive || t.team == Team::Neutral) return false;
  if (policies_[id]) return policies_[id]->needs_observation();
  return options_.render_observations && is_external(id);
}

std::shared_ptr<const Observation> Env::observation(TankId id) {
  const auto& t = world_.tanks.at(id);
  if (!t.alive || t.team == Team::Neutral) {
    throw Error(ErrorKind::ObserverDead, "observer dead: tank " + std::to_string(id));
  }
  if (!observation_fresh_[id]) {
    auto& slot = observations_[id];
    // Reuse the buffer unless a caller still holds the previous frame.
    if (!slot || slot.use_count() > 1) slot = std::make_shared<Observation>();
    render_observation(world_, id, visibility_[id], *slot);
    observation_fresh_[id] = true;
  }
  return observations_[id];
}

void Env::refresh_perception() {
  visibility_ = visibility_all(world_, config_.sensing());
  std::fill(observation_fresh_.begin(), observation_fresh_.end(), false);
  for (const auto& t : world_.tanks) {
    if (wants_observation(t.id)) observation(t.id);
  }
}

StepInfo Env::info() const {
  StepInfo info;
  info.tick = world_.tick;
  for (const auto& t : world_.tanks) {
    if (!t.alive) continue;
    if (t.team == Team::Red) ++info.alive_red;
    else if (t.team == Team::Blue) ++info.alive_blue;
    else ++info.alive_neutral;
  }
  info.red_score = scoreboard_.team_score(Team::Red, config_.team_includes_ally_kills);
  info.blue_score = scoreboard_.team_score(Team::Blue, config_.team_includes_ally_kills);
  info.status = status_;
  return info;
}

StepResult Env::step(const ActionMap& external_actions) {
  require_running();
  for (TankId id : external_) {
    if (world_.tanks[id].alive && !external_actions.contains(id)) {
      throw Error(ErrorKind::IncompleteActionMap,
                  "incomplete action map: no action for external tank " + std::to_string(id));
    }
  }
  if (options_.replay_mode) {
    throw Error(ErrorKind::Config, "env built in replay mode has no policies; use step_all");
  }

  const std::size_t n = world_.tanks.size();
  std::vector<Action> actions(n);
  std::vector<bool> was_alive(n);
  for (const auto& t : world_.tanks) {
    was_alive[t.id] = t.alive;
    if (!t.alive) continue;
    if (!policies_[t.id]) {
      actions[t.id] = quantize_action(external_actions.at(t.id));
      continue;
    }
    AgentView view;
    view.self = t.pose;
    view.tick = world_.tick;
    if (t.team != Team::Neutral && policies_[t.id]->needs_observation()) view.observation = observation(t.id);
    actions[t.id] = quantize_action(policies_[t.id]->act(view, rngs_[t.id]));
  }
  return advance(actions, was_alive);
}

StepResult Env::step_all(const ActionMap& all_actions) {
  require_running();
  const std::size_t n = world_.tanks.size();
  std::vector<Action> actions(n);
  std::vector<bool> was_alive(n);
  for (const auto& t : world_.tanks) {
    was_alive[t.id] = t.alive;
    if (!t.alive) continue;
    if (auto it = all_actions.find(t.id); it != all_actions.end()) actions[t.id] = quantize_action(it->second);
  }
  return advance(actions, was_alive);
}

StepResult Env::advance(const std::vector<Action>& actions, const std::vector<bool>& was_alive) {
  ActionMap map;
  for (const auto& t : world_.tanks) {
    if (t.alive) map.emplace_hint(map.end(), t.id, actions[t.id]);
  }
  StepOutcome outcome = step_world(std::move(world_), map, config_.physics);
  world_ = std::move(outcome.state);
  last_actions_ = actions;
  const auto deltas = scoreboard_.apply(outcome.events);
  event_log_.insert(event_log_.end(), outcome.events.begin(), outcome.events.end());
  refresh_perception();
  status_ = is_terminal(world_, world_.tick, config_);

  StepResult result;
  result.events = std::move(outcome.events);
  result.done = status_.done();
  result.info = info();
  for (TankId id : external_) {
    if (!was_alive[id]) continue;
    AgentStep agent;
    agent.id = id;
    agent.alive = world_.tanks[id].alive;
    agent.reward_components = deltas[id];
    agent.scalar_reward = scalarize(deltas[id], config_.reward_weights);
    if (options_.render_observations) {
      agent.observation = agent.alive ? observation(id) : std::make_shared<const Observation>();
    }
    result.agents.push_back(std::move(agent));
  }
  return result;
}

RandomDriver::RandomDriver(const Env& env) : rngs_(env.state().tanks.size()) {
  for (TankId id : env.external_tanks()) rngs_[id] = Rng(derive_stream_seed(env.seed(), Stream::Driver, id));
}

ActionMap RandomDriver::act(const Env& env) {
  ActionMap actions;
  for (TankId id : env.external_tanks()) {
    if (!env.state().tanks[id].alive) continue;
    Rng& rng = rngs_[id];
    const double throttle = rng.uniform(-1.0, 1.0);
    const double steer = rng.uniform(-1.0, 1.0);
    const double fire = rng.uniform(-1.0, 1.0);
    actions.emplace(id, Action{throttle, steer, fire});
  }
  return actions;
}

std::string_view status_name(const TerminalStatus& status) {
  switch (status.kind) {
    case TerminalStatus::Kind::Running: return "running";
    case TerminalStatus::Kind::MaxSteps: return "max_steps";
    case TerminalStatus::Kind::TeamEliminated: return status.team == Team::Red ? "red_eliminated" : "blue_eliminated";
  }
  return "running";
}

EpisodeSummary summarize(const Env& env) {
  EpisodeSummary s;
  s.seed = env.seed();
  s.ticks = env.state().tick;
  const StepInfo info = env.info();
  s.red_score = info.red_score;
  s.blue_score = info.blue_score;
  s.status = env.status();
  const auto& totals = env.scoreboard().totals();
  const auto& teams = env.scoreboard().teams();
  for (std::size_t id = 0; id < totals.size(); ++id) {
    if (teams[id] == Team::Neutral) continue;
    // Summed field by field: operator+= caps `died`, which is per tank.
    RewardComponents& t = teams[id] == Team::Red ? s.red_totals : s.blue_totals;
    t.enemy_kills += totals[id].enemy_kills;
    t.ally_kills += totals[id].ally_kills;
    t.neutral_kills += totals[id].neutral_kills;
    t.died += totals[id].died;
  }
  return s;
}

EpisodeSummary play_out(Env& env, const std::function<void()>& after_step) {
  RandomDriver driver(env);
  while (!env.done()) {
    env.step(driver.act(env));
    if (after_step) after_step();
  }
  return summarize(env);
}

VecEnv::VecEnv(const std::vector<EnvConfig>& configs, EnvOptions options) {
  for (const auto& c : configs) envs_.push_back(std::make_unique<Env>(c, options));
}

std::vector<StepResult> VecEnv::reset(const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() != envs_.size()) throw Error(ErrorKind::Config, "one seed per environment required");
  std::vector<std::future<StepResult>> jobs;
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [this, i, &seeds] { return envs_[i]->reset(seeds[i]); }));
  }
  std::vector<StepResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::vector<StepResult> VecEnv::step(const std::vector<ActionMap>& actions) {
  if (actions.size() != envs_.size()) throw Error(ErrorKind::Config, "one action map per environment required");
  std::vector<std::future<StepResult>> jobs;
  for (std::size_t i = 0; i < envs_.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [this, i, &actions] { return envs_[i]->step(actions[i]); }));
  }
  std::vector<StepResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace tanksworld
