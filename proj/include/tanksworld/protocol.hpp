#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tanksworld/config.hpp"
#include "tanksworld/scoring.hpp"
#include "tanksworld/world.hpp"

namespace tanksworld::twp {

// Wire protocol "twp/1": one JSON object per WebSocket text frame, keys
// sorted, no whitespace. Every message carries "v", "session" and "type".
// Field-by-field documentation lives in docs/protocol.md.

inline constexpr std::string_view kVersion = "twp/1";
inline constexpr unsigned short kDefaultPort = 8736;

enum class Role { Agent, Human, Viewer };
std::string_view role_name(Role role);

struct Hello {
  Role role = Role::Viewer;
  std::vector<TankId> tanks;  // empty: let the server choose

  friend bool operator==(const Hello&, const Hello&) = default;
};

struct Assigned {
  std::vector<TankId> tanks;
  /// Canonical config text, one `key -> value` pair per EnvConfig key.
  std::map<std::string, std::string> config;

  friend bool operator==(const Assigned&, const Assigned&) = default;
};

struct Entity {
  TankId id = 0;
  Team team = Team::Neutral;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  bool alive = true;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct ObstacleInfo {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;

  friend bool operator==(const ObstacleInfo&, const ObstacleInfo&) = default;
};

struct ProjectileInfo {
  TankId shooter = 0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  friend bool operator==(const ProjectileInfo&, const ProjectileInfo&) = default;
};

struct Visible {
  std::vector<TankId> enemies;
  std::vector<TankId> neutrals;

  friend bool operator==(const Visible&, const Visible&) = default;
};

struct StateFrame {
  std::uint64_t tick = 0;
  double arena_side = 100.0;
  std::vector<Entity> entities;
  std::vector<ObstacleInfo> obstacles;
  std::vector<ProjectileInfo> projectiles;
  std::map<TankId, Visible> visibility;
  std::map<TankId, RewardComponents> rewards;  // deltas for this tick
  int red_score = 0;
  int blue_score = 0;
  bool done = false;

  friend bool operator==(const StateFrame&, const StateFrame&) = default;
};

struct ObsFrame {
  std::uint64_t tick = 0;
  TankId tank = 0;
  bool alive = true;
  std::vector<std::uint8_t> grid;  // row-major (channel, row, col), 8-bit
  RewardComponents reward;         // delta for this tick
  bool done = false;

  friend bool operator==(const ObsFrame&, const ObsFrame&) = default;
};

struct ActionMsg {
  std::uint64_t tick = 0;
  TankId tank = 0;
  double throttle = 0.0;
  double steer = 0.0;
  double fire = -1.0;
  /// Set by decode when a component was out of range and got clamped.
  /// Never encoded.
  bool clamped = false;

  Action action() const { return {throttle, steer, fire}; }
  friend bool operator==(const ActionMsg& a, const ActionMsg& b) {
    return a.tick == b.tick && a.tank == b.tank && a.throttle == b.throttle && a.steer == b.steer && a.fire == b.fire;
  }
};

struct Reset {
  std::uint64_t seed = 0;

  friend bool operator==(const Reset&, const Reset&) = default;
};

struct ErrorMsg {
  std::string code;
  std::string text;

  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

using Body = std::variant<Hello, Assigned, StateFrame, ObsFrame, ActionMsg, Reset, ErrorMsg>;

struct Message {
  std::string session;
  Body body;

  friend bool operator==(const Message&, const Message&) = default;
};

std::string_view type_name(const Body& body);

/// Decode failure. `field()` is a JSON path such as `entities[2].x`, or
/// `v` when the version string does not match.
class DecodeError : public Error {
 public:
  DecodeError(std::string field, const std::string& what, bool version_mismatch = false)
      : Error(ErrorKind::Protocol, what), field_(std::move(field)), version_mismatch_(version_mismatch) {}
  const std::string& field() const { return field_; }
  bool version_mismatch() const { return version_mismatch_; }

 private:
  std::string field_;
  bool version_mismatch_;
};

std::string encode(const Message& message);
Message decode(std::string_view text);

/// Error codes carried by ErrorMsg.
namespace codes {
inline constexpr std::string_view kTankTaken = "tank_taken";
inline constexpr std::string_view kVersionMismatch = "version_mismatch";
inline constexpr std::string_view kBadMessage = "bad_message";
inline constexpr std::string_view kNotAllowed = "not_allowed";
inline constexpr std::string_view kUnknownTank = "unknown_tank";
inline constexpr std::string_view kStaleTick = "stale_tick";
}  // namespace codes

std::map<std::string, std::string> config_echo(const EnvConfig& config);

}  // namespace tanksworld::twp
