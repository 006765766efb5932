#include "tanksworld/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace tanksworld {

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    config_error("bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) config_error("non-finite value for '" + std::string(key) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  config_error("bad boolean for '" + std::string(key) + "': '" + std::string(text) + "'");
}

struct Field {
  const char* key;
  std::function<void(EnvConfig&, std::string_view)> set;
  std::function<std::string(const EnvConfig&)> get;
};

template <typename T>
Field number_field(const char* key, T EnvConfig::*member) {
  return {key, [key, member](EnvConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
          [member](const EnvConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
            else return std::to_string(c.*member);
          }};
}

template <typename T>
Field physics_field(const char* key, T PhysicsParams::*member) {
  return {key, [key, member](EnvConfig& c, std::string_view v) { c.physics.*member = parse_number<T>(key, v); },
          [member](const EnvConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.physics.*member);
            else return std::to_string(c.physics.*member);
          }};
}

Field weight_field(const char* key, double RewardWeights::*member) {
  return {key,
          [key, member](EnvConfig& c, std::string_view v) { c.reward_weights.*member = parse_number<double>(key, v); },
          [member](const EnvConfig& c) { return format_double(c.reward_weights.*member); }};
}

Field flag_field(const char* key, bool EnvConfig::*member) {
  return {key, [key, member](EnvConfig& c, std::string_view v) { c.*member = parse_bool(key, v); },
          [member](const EnvConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field control_field(const char* key, ControlSpec EnvConfig::*member) {
  return {key, [member](EnvConfig& c, std::string_view v) { c.*member = ControlSpec::parse(v); },
          [member](const EnvConfig& c) { return (c.*member).to_string(); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      number_field("team_size", &EnvConfig::team_size),
      number_field("neutral_count", &EnvConfig::neutral_count),
      number_field("obstacle_density", &EnvConfig::obstacle_density),
      number_field("comm_range", &EnvConfig::comm_range),
      number_field("max_steps", &EnvConfig::max_steps),
      number_field("seed", &EnvConfig::seed),
      physics_field("arena_side", &PhysicsParams::arena_side),
      physics_field("dt", &PhysicsParams::dt),
      physics_field("max_speed", &PhysicsParams::max_speed),
      physics_field("max_turn_rate", &PhysicsParams::max_turn_rate),
      physics_field("tank_radius", &PhysicsParams::tank_radius),
      physics_field("projectile_speed", &PhysicsParams::projectile_speed),
      physics_field("projectile_lifetime", &PhysicsParams::projectile_lifetime),
      physics_field("projectile_radius", &PhysicsParams::projectile_radius),
      physics_field("reload_interval", &PhysicsParams::reload_interval),
      physics_field("obstacle_radius_min", &PhysicsParams::obstacle_radius_min),
      physics_field("obstacle_radius_max", &PhysicsParams::obstacle_radius_max),
      physics_field("tank_health", &PhysicsParams::tank_health),
      weight_field("w_enemy", &RewardWeights::w_enemy),
      weight_field("w_death", &RewardWeights::w_death),
      weight_field("w_ally", &RewardWeights::w_ally),
      weight_field("w_neutral", &RewardWeights::w_neutral),
      flag_field("two_hop_only", &EnvConfig::two_hop_only),
      flag_field("neutral_always_visible", &EnvConfig::neutral_always_visible),
      flag_field("team_includes_ally_kills", &EnvConfig::team_includes_ally_kills),
      control_field("control.red", &EnvConfig::red_control),
      control_field("control.blue", &EnvConfig::blue_control),
  };
  return table;
}

constexpr std::string_view kControlPrefix = "control.";

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ControlSpec ControlSpec::parse(std::string_view text) {
  text = trim(text);
  ControlSpec spec;
  std::string_view body = text;
  if (const auto at = text.rfind('@'); at != std::string_view::npos) {
    spec.skill = parse_number<double>("skill", text.substr(at + 1));
    body = text.substr(0, at);
  }
  if (body == "external") {
    if (spec.skill != 1.0) config_error("external control takes no skill level");
    return spec;
  }
  const auto colon = body.find(':');
  if (colon == std::string_view::npos) config_error("bad control spec '" + std::string(text) + "'");
  const std::string_view kind = body.substr(0, colon);
  spec.name = std::string(body.substr(colon + 1));
  if (kind == "scripted") {
    spec.kind = Kind::Scripted;
  } else if (kind == "clone") {
    spec.kind = Kind::Clone;
  } else {
    config_error("unknown control kind '" + std::string(kind) + "'");
  }
  if (spec.name.empty()) config_error("control spec '" + std::string(text) + "' is missing a name");
  return spec;
}

std::string ControlSpec::to_string() const {
  if (kind == Kind::External) return "external";
  std::string out = (kind == Kind::Scripted ? "scripted:" : "clone:") + name;
  if (skill != 1.0) out += "@" + format_double(skill);
  return out;
}

ControlSpec EnvConfig::control_for(TankId id) const {
  if (auto it = control_overrides.find(id); it != control_overrides.end()) return it->second;
  return static_cast<int>(id) < team_size ? red_control : blue_control;
}

WorldSpec EnvConfig::world_spec() const { return {team_size, neutral_count, obstacle_density, physics}; }

SensingOptions EnvConfig::sensing() const { return {comm_range, two_hop_only, neutral_always_visible}; }

void EnvConfig::validate() const {
  if (team_size < 1) config_error("team_size must be >= 1");
  if (neutral_count < 0) config_error("neutral_count must be >= 0");
  if (!(obstacle_density >= 0.0 && obstacle_density <= 1.0)) config_error("obstacle_density must lie in [0, 1]");
  if (!(comm_range >= 0.0)) config_error("comm_range must be >= 0");
  if (max_steps < 1) config_error("max_steps must be >= 1");
  const auto& p = physics;
  if (!(p.arena_side > 0.0)) config_error("arena_side must be > 0");
  if (!(p.dt > 0.0)) config_error("dt must be > 0");
  if (!(p.max_speed >= 0.0)) config_error("max_speed must be >= 0");
  if (!(p.max_turn_rate >= 0.0)) config_error("max_turn_rate must be >= 0");
  if (!(p.tank_radius > 0.0)) config_error("tank_radius must be > 0");
  if (!(p.projectile_speed > 0.0)) config_error("projectile_speed must be > 0");
  if (p.projectile_lifetime < 1) config_error("projectile_lifetime must be >= 1");
  if (!(p.projectile_radius >= 0.0)) config_error("projectile_radius must be >= 0");
  if (p.reload_interval < 0) config_error("reload_interval must be >= 0");
  if (!(p.obstacle_radius_min > 0.0 && p.obstacle_radius_min <= p.obstacle_radius_max)) {
    config_error("obstacle radii must satisfy 0 < obstacle_radius_min <= obstacle_radius_max");
  }
  if (p.tank_health != 1) config_error("tank_health: only one-hit kills (1) are supported");
  auto check_control = [](const ControlSpec& c, const std::string& where) {
    if (!(c.skill >= 0.0 && c.skill <= 1.0)) config_error(where + ": skill must lie in [0, 1]");
    if (c.kind == ControlSpec::Kind::Scripted &&
        std::find_if(std::begin(kScriptedPolicies), std::end(kScriptedPolicies),
                     [&](const char* n) { return c.name == n; }) == std::end(kScriptedPolicies)) {
      config_error(where + ": unknown scripted policy '" + c.name + "'");
    }
  };
  check_control(red_control, "control.red");
  check_control(blue_control, "control.blue");
  for (const auto& [id, c] : control_overrides) {
    if (static_cast<int>(id) >= team_tank_count()) {
      config_error("control." + std::to_string(id) + ": not a red or blue tank id");
    }
    check_control(c, "control." + std::to_string(id));
  }
}

void EnvConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  if (key.starts_with(kControlPrefix)) {
    const std::string_view id_text = key.substr(kControlPrefix.size());
    TankId id = 0;
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec == std::errc() && ptr == id_text.data() + id_text.size() && !id_text.empty()) {
      control_overrides[id] = ControlSpec::parse(value);
      return;
    }
  }
  config_error("unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> EnvConfig::keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

EnvConfig parse_config(std::string_view text) {
  EnvConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  config.validate();
  return config;
}

std::string format_config(const EnvConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  for (const auto& [id, c] : config.control_overrides) {
    out += std::string(kControlPrefix) + std::to_string(id) + " = " + c.to_string() + "\n";
  }
  return out;
}

EnvConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace tanksworld
