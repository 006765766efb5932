#include "tanksworld/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tanksworld/observation.hpp"

namespace tanksworld::twp {

using json = nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw DecodeError(field, "field '" + (field.empty() ? std::string("<message>") : field) + "': " + what);
}

std::uint64_t as_u64(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  fail(field, "expected a non-negative integer");
}

TankId as_tank(const json& j, const std::string& field) {
  const std::uint64_t v = as_u64(j, field);
  if (v > std::numeric_limits<TankId>::max()) fail(field, "tank id out of range");
  return static_cast<TankId>(v);
}

int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(field, "integer out of range");
  return static_cast<int>(v);
}

double as_double(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) fail(field, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array");
  return j;
}

TankId parse_id_key(const std::string& key, const std::string& field) {
  TankId v = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
  if (ec != std::errc() || ptr != key.data() + key.size() || key.empty() || (key.size() > 1 && key[0] == '0')) {
    fail(field, "expected a tank id key");
  }
  return v;
}

// Tracks which keys of an object were consumed so leftovers can be
// reported as unknown fields.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const json& get(std::string_view key) {
    const auto it = j_.find(std::string(key));
    if (it == j_.end()) fail(join(path_, key), "missing");
    used_.insert(std::string(key));
    return *it;
  }
  std::string path(std::string_view key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) fail(join(path_, key), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json encode_components(const RewardComponents& c) {
  return {{"ally_kills", c.ally_kills}, {"died", c.died}, {"enemy_kills", c.enemy_kills}, {"neutral_kills", c.neutral_kills}};
}

RewardComponents decode_components(const json& j, const std::string& path) {
  Fields f(j, path);
  RewardComponents c;
  c.ally_kills = as_int(f.get("ally_kills"), f.path("ally_kills"));
  c.died = as_int(f.get("died"), f.path("died"));
  c.enemy_kills = as_int(f.get("enemy_kills"), f.path("enemy_kills"));
  c.neutral_kills = as_int(f.get("neutral_kills"), f.path("neutral_kills"));
  f.finish();
  return c;
}

json encode_ids(const std::vector<TankId>& ids) {
  json out = json::array();
  for (TankId id : ids) out.push_back(id);
  return out;
}

std::vector<TankId> decode_ids(const json& j, const std::string& path) {
  std::vector<TankId> out;
  const json& arr = as_array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_tank(arr[i], index_path(path, i)));
  return out;
}

Role parse_role(const std::string& text, const std::string& field) {
  if (text == "agent") return Role::Agent;
  if (text == "human") return Role::Human;
  if (text == "viewer") return Role::Viewer;
  fail(field, "unknown role '" + text + "'");
}

Team parse_team_field(const std::string& text, const std::string& field) {
  try {
    return parse_team(text);
  } catch (const Error&) {
    fail(field, "unknown team '" + text + "'");
  }
}

struct BodyEncoder {
  json& j;

  void operator()(const Hello& m) const {
    j["role"] = role_name(m.role);
    j["tanks"] = encode_ids(m.tanks);
  }
  void operator()(const Assigned& m) const {
    j["tanks"] = encode_ids(m.tanks);
    j["config"] = json::object();
    for (const auto& [k, v] : m.config) j["config"][k] = v;
  }
  void operator()(const StateFrame& m) const {
    j["tick"] = m.tick;
    j["arena_side"] = m.arena_side;
    j["entities"] = json::array();
    for (const auto& e : m.entities) {
      j["entities"].push_back(
          {{"alive", e.alive}, {"heading", e.heading}, {"id", e.id}, {"team", team_name(e.team)}, {"x", e.x}, {"y", e.y}});
    }
    j["obstacles"] = json::array();
    for (const auto& o : m.obstacles) j["obstacles"].push_back({{"radius", o.radius}, {"x", o.x}, {"y", o.y}});
    j["projectiles"] = json::array();
    for (const auto& p : m.projectiles) {
      j["projectiles"].push_back({{"heading", p.heading}, {"shooter", p.shooter}, {"x", p.x}, {"y", p.y}});
    }
    j["visibility"] = json::object();
    for (const auto& [id, v] : m.visibility) {
      j["visibility"][std::to_string(id)] = {{"enemies", encode_ids(v.enemies)}, {"neutrals", encode_ids(v.neutrals)}};
    }
    j["rewards"] = json::object();
    for (const auto& [id, c] : m.rewards) j["rewards"][std::to_string(id)] = encode_components(c);
    j["scores"] = {{"blue", m.blue_score}, {"red", m.red_score}};
    j["done"] = m.done;
  }
  void operator()(const ObsFrame& m) const {
    j["tick"] = m.tick;
    j["tank"] = m.tank;
    j["alive"] = m.alive;
    j["grid"] = base64_encode(m.grid);
    j["shape"] = {kObsChannels, kObsSize, kObsSize};
    j["reward"] = encode_components(m.reward);
    j["done"] = m.done;
  }
  void operator()(const ActionMsg& m) const {
    j["tick"] = m.tick;
    j["tank"] = m.tank;
    j["throttle"] = m.throttle;
    j["steer"] = m.steer;
    j["fire"] = m.fire;
  }
  void operator()(const Reset& m) const { j["seed"] = m.seed; }
  void operator()(const ErrorMsg& m) const {
    j["code"] = m.code;
    j["text"] = m.text;
  }
};

Hello decode_hello(Fields& f) {
  Hello m;
  m.role = parse_role(as_string(f.get("role"), f.path("role")), f.path("role"));
  m.tanks = decode_ids(f.get("tanks"), f.path("tanks"));
  return m;
}

Assigned decode_assigned(Fields& f) {
  Assigned m;
  m.tanks = decode_ids(f.get("tanks"), f.path("tanks"));
  const json& config = f.get("config");
  if (!config.is_object()) fail(f.path("config"), "expected an object");
  for (const auto& [k, v] : config.items()) m.config[k] = as_string(v, join(f.path("config"), k));
  return m;
}

StateFrame decode_state(Fields& f) {
  StateFrame m;
  m.tick = as_u64(f.get("tick"), f.path("tick"));
  m.arena_side = as_double(f.get("arena_side"), f.path("arena_side"));

  const std::string ents = f.path("entities");
  const json& entities = as_array(f.get("entities"), ents);
  for (std::size_t i = 0; i < entities.size(); ++i) {
    Fields e(entities[i], index_path(ents, i));
    Entity out;
    out.alive = as_bool(e.get("alive"), e.path("alive"));
    out.heading = as_double(e.get("heading"), e.path("heading"));
    out.id = as_tank(e.get("id"), e.path("id"));
    out.team = parse_team_field(as_string(e.get("team"), e.path("team")), e.path("team"));
    out.x = as_double(e.get("x"), e.path("x"));
    out.y = as_double(e.get("y"), e.path("y"));
    e.finish();
    m.entities.push_back(out);
  }

  const std::string obs = f.path("obstacles");
  const json& obstacles = as_array(f.get("obstacles"), obs);
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    Fields o(obstacles[i], index_path(obs, i));
    ObstacleInfo out;
    out.radius = as_double(o.get("radius"), o.path("radius"));
    out.x = as_double(o.get("x"), o.path("x"));
    out.y = as_double(o.get("y"), o.path("y"));
    o.finish();
    m.obstacles.push_back(out);
  }

  const std::string projs = f.path("projectiles");
  const json& projectiles = as_array(f.get("projectiles"), projs);
  for (std::size_t i = 0; i < projectiles.size(); ++i) {
    Fields p(projectiles[i], index_path(projs, i));
    ProjectileInfo out;
    out.heading = as_double(p.get("heading"), p.path("heading"));
    out.shooter = as_tank(p.get("shooter"), p.path("shooter"));
    out.x = as_double(p.get("x"), p.path("x"));
    out.y = as_double(p.get("y"), p.path("y"));
    p.finish();
    m.projectiles.push_back(out);
  }

  const std::string vis_path = f.path("visibility");
  const json& vis = f.get("visibility");
  if (!vis.is_object()) fail(vis_path, "expected an object");
  for (const auto& [k, v] : vis.items()) {
    const std::string p = join(vis_path, k);
    Fields vf(v, p);
    Visible out;
    out.enemies = decode_ids(vf.get("enemies"), vf.path("enemies"));
    out.neutrals = decode_ids(vf.get("neutrals"), vf.path("neutrals"));
    vf.finish();
    m.visibility[parse_id_key(k, p)] = std::move(out);
  }

  const std::string rew_path = f.path("rewards");
  const json& rewards = f.get("rewards");
  if (!rewards.is_object()) fail(rew_path, "expected an object");
  for (const auto& [k, v] : rewards.items()) {
    const std::string p = join(rew_path, k);
    m.rewards[parse_id_key(k, p)] = decode_components(v, p);
  }

  Fields scores(f.get("scores"), f.path("scores"));
  m.blue_score = as_int(scores.get("blue"), scores.path("blue"));
  m.red_score = as_int(scores.get("red"), scores.path("red"));
  scores.finish();

  m.done = as_bool(f.get("done"), f.path("done"));
  return m;
}

ObsFrame decode_obs(Fields& f) {
  ObsFrame m;
  m.tick = as_u64(f.get("tick"), f.path("tick"));
  m.tank = as_tank(f.get("tank"), f.path("tank"));
  m.alive = as_bool(f.get("alive"), f.path("alive"));
  const json& shape = as_array(f.get("shape"), f.path("shape"));
  if (shape != json{kObsChannels, kObsSize, kObsSize}) fail(f.path("shape"), "expected [4,128,128]");
  try {
    m.grid = base64_decode(as_string(f.get("grid"), f.path("grid")));
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    fail(f.path("grid"), e.what());
  }
  if (m.grid.size() != static_cast<std::size_t>(kObsCells)) fail(f.path("grid"), "expected 65536 bytes");
  m.reward = decode_components(f.get("reward"), f.path("reward"));
  m.done = as_bool(f.get("done"), f.path("done"));
  return m;
}

ActionMsg decode_action(Fields& f) {
  ActionMsg m;
  m.tick = as_u64(f.get("tick"), f.path("tick"));
  m.tank = as_tank(f.get("tank"), f.path("tank"));
  auto component = [&](std::string_view key) {
    const double v = as_double(f.get(key), f.path(key));
    const double c = std::clamp(v, -1.0, 1.0);
    if (c != v) m.clamped = true;
    return c;
  };
  m.throttle = component("throttle");
  m.steer = component("steer");
  m.fire = component("fire");
  return m;
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::Agent: return "agent";
    case Role::Human: return "human";
    case Role::Viewer: return "viewer";
  }
  return "viewer";
}

std::string_view type_name(const Body& body) {
  static constexpr std::string_view kNames[] = {"hello", "assigned", "state", "obs", "action", "reset", "error"};
  return kNames[body.index()];
}

std::string encode(const Message& message) {
  json j = json::object();
  std::visit(BodyEncoder{j}, message.body);
  j["v"] = kVersion;
  j["session"] = message.session;
  j["type"] = type_name(message.body);
  return j.dump();
}

Message decode(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("", std::string("malformed JSON: ") + e.what());
  }
  Fields f(j, "");
  const std::string version = as_string(f.get("v"), "v");
  if (version != kVersion) {
    throw DecodeError("v", "field 'v': unsupported protocol version '" + version + "', expected twp/1", true);
  }
  Message m;
  m.session = as_string(f.get("session"), "session");
  const std::string type = as_string(f.get("type"), "type");
  if (type == "hello") {
    m.body = decode_hello(f);
  } else if (type == "assigned") {
    m.body = decode_assigned(f);
  } else if (type == "state") {
    m.body = decode_state(f);
  } else if (type == "obs") {
    m.body = decode_obs(f);
  } else if (type == "action") {
    m.body = decode_action(f);
  } else if (type == "reset") {
    m.body = Reset{as_u64(f.get("seed"), "seed")};
  } else if (type == "error") {
    m.body = ErrorMsg{as_string(f.get("code"), "code"), as_string(f.get("text"), "text")};
  } else {
    fail("type", "unknown message type '" + type + "'");
  }
  f.finish();
  return m;
}

std::map<std::string, std::string> config_echo(const EnvConfig& config) {
  std::map<std::string, std::string> out;
  std::istringstream lines(format_config(config));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

}  // namespace tanksworld::twp
