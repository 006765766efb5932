#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tanksworld/scoring.hpp"
#include "tanksworld/sensing.hpp"
#include "tanksworld/world.hpp"

namespace tanksworld {

/// Who drives a tank. Text form: `external`, `scripted:<name>[@skill]`,
/// `clone:<model path>[@skill]`.
struct ControlSpec {
  enum class Kind { External, Scripted, Clone };

  Kind kind = Kind::External;
  std::string name;  // scripted policy name or clone model path
  double skill = 1.0;

  static ControlSpec external() { return {}; }
  static ControlSpec scripted(std::string name, double skill = 1.0) { return {Kind::Scripted, std::move(name), skill}; }
  static ControlSpec clone(std::string path, double skill = 1.0) { return {Kind::Clone, std::move(path), skill}; }

  static ControlSpec parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const ControlSpec&, const ControlSpec&) = default;
};

inline constexpr const char* kScriptedPolicies[] = {"random", "patrol", "aggressive"};

struct EnvConfig {
  int team_size = 5;
  int neutral_count = 2;
  double obstacle_density = 0.5;
  double comm_range = 30.0;
  int max_steps = 1000;
  std::uint64_t seed = 0;
  PhysicsParams physics;
  RewardWeights reward_weights;
  bool two_hop_only = false;
  bool neutral_always_visible = false;
  bool team_includes_ally_kills = false;
  ControlSpec red_control = ControlSpec::external();
  ControlSpec blue_control = ControlSpec::scripted("aggressive");
  std::map<TankId, ControlSpec> control_overrides;

  int team_tank_count() const { return 2 * team_size; }
  int tank_count() const { return 2 * team_size + neutral_count; }
  /// Resolved controller for a red or blue tank id.
  ControlSpec control_for(TankId id) const;
  WorldSpec world_spec() const;
  SensingOptions sensing() const;

  /// Throws ErrorKind::Config naming the offending field.
  void validate() const;

  /// Assigns one field from its text form. Unknown keys are rejected.
  void set(std::string_view key, std::string_view value);
  /// Every settable key except per-tank `control.<id>` entries.
  static std::vector<std::string> keys();
};

/// `key = value` lines; `#` starts a comment; blank lines ignored.
EnvConfig parse_config(std::string_view text);
/// Canonical text form; parse_config(format_config(c)) reproduces c exactly.
std::string format_config(const EnvConfig& config);
EnvConfig load_config_file(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace tanksworld
