#include "tanksworld/trajectory.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tanksworld {

namespace {

constexpr std::string_view kMagicPrefix = "TANKSWORLD-TRAJ ";

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorKind::CorruptFile, "corrupt file: " + why); }

std::string format_action_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto next = line.find(' ', pos);
    const auto end = next == std::string_view::npos ? line.size() : next;
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view text, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    corrupt("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_hash(std::string_view text) {
  if (text.size() != 16) corrupt("bad hash '" + std::string(text) + "'");
  return parse_hex64(text);
}

// Reads '\n'-terminated lines and checksums them as they pass.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    if (in_.eof()) corrupt("truncated record '" + line.substr(0, 40) + "'");
    ++line_no_;
    pending_ = line;
    return true;
  }
  // Folds the last line into the checksum.
  void commit() {
    checksum_.update(pending_);
    checksum_.update("\n", 1);
  }
  std::uint64_t checksum() const { return checksum_.digest(); }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  Fnv1a checksum_;
  std::string pending_;
  std::size_t line_no_ = 0;
};

}  // namespace

// --- writer ---

void TrajectoryWriter::emit(const std::string& line) {
  if (closed_) throw Error(ErrorKind::Io, "trajectory already closed");
  out_ << line << '\n';
  if (!out_) throw Error(ErrorKind::Io, "trajectory write failed");
  checksum_.update(line);
  checksum_.update("\n", 1);
}

void TrajectoryWriter::write_header(const TrajectoryHeader& header) {
  emit(std::string(kTrajectoryMagic));
  emit("created " + header.created);
  emit("seed " + std::to_string(header.seed));
  emit(std::string("embed_observations ") + (header.embed_observations ? "1" : "0"));
  std::istringstream config(format_config(header.config));
  for (std::string line; std::getline(config, line);) emit("config " + line);
  emit("begin");
}

void TrajectoryWriter::write_observation(const ObservationRecord& record) {
  emit("o " + std::to_string(record.tick) + " " + std::to_string(record.tank) + " " + base64_encode(record.grid));
}

void TrajectoryWriter::write_tick(const TickRecord& record) {
  std::string line = "t " + std::to_string(record.tick) + " " + hex64(record.state_hash);
  for (const auto& a : record.actions) {
    line += ' ';
    line += format_action_value(a.throttle);
    line += ' ';
    line += format_action_value(a.steer);
    line += ' ';
    line += format_action_value(a.fire);
  }
  emit(line);
  ++ticks_;
}

void TrajectoryWriter::finalize(const TrajectoryFooter& footer) {
  emit("end " + std::to_string(footer.ticks));
  emit("score red " + std::to_string(footer.red_score));
  emit("score blue " + std::to_string(footer.blue_score));
  emit("final_state " + hex64(footer.final_state_hash));
  for (std::size_t id = 0; id < footer.components.size(); ++id) {
    const auto& c = footer.components[id];
    emit("components " + std::to_string(id) + " " + std::to_string(c.enemy_kills) + " " +
         std::to_string(c.ally_kills) + " " + std::to_string(c.neutral_kills) + " " + std::to_string(c.died));
  }
  const std::uint64_t digest = checksum_.digest();
  emit("checksum " + hex64(digest));
  out_.flush();
  closed_ = true;
  if (!out_) throw Error(ErrorKind::Io, "trajectory write failed");
}

void TrajectoryWriter::abort() {
  if (closed_) return;
  closed_ = true;
  out_.clear();
  out_ << "unfinalized " << ticks_ << '\n';
  out_.flush();
}

// --- reader ---

TrajectoryFile read_trajectory(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) corrupt("empty file");
  if (line != kTrajectoryMagic) {
    if (line.starts_with(kMagicPrefix)) {
      throw Error(ErrorKind::UnsupportedVersion, "unsupported version '" + line.substr(kMagicPrefix.size()) + "'");
    }
    corrupt("missing TANKSWORLD-TRAJ magic");
  }
  reader.commit();

  TrajectoryFile file;
  std::string config_text;
  bool seen_seed = false;
  for (;;) {
    if (!reader.next(line)) corrupt("header not terminated");
    reader.commit();
    if (line == "begin") break;
    const auto space = line.find(' ');
    const std::string_view key = std::string_view(line).substr(0, space);
    const std::string_view value =
        space == std::string::npos ? std::string_view{} : std::string_view(line).substr(space + 1);
    if (key == "created") {
      file.header.created = std::string(value);
    } else if (key == "seed") {
      file.header.seed = parse_field<std::uint64_t>(value, "seed");
      seen_seed = true;
    } else if (key == "embed_observations") {
      file.header.embed_observations = parse_field<int>(value, "embed flag") != 0;
    } else if (key == "config") {
      config_text += std::string(value) + "\n";
    } else {
      corrupt("unknown header field '" + std::string(key) + "'");
    }
  }
  if (!seen_seed) corrupt("header has no seed");
  try {
    file.header.config = parse_config(config_text);
  } catch (const Error& e) {
    corrupt(std::string("header config: ") + e.what());
  }
  const std::size_t n_tanks = static_cast<std::size_t>(file.header.config.tank_count());

  bool ended = false;
  while (!ended) {
    if (!reader.next(line)) corrupt("file truncated before footer");
    const auto fields = split(line);
    if (fields.empty()) corrupt("blank record");
    const std::string_view tag = fields[0];
    if (tag == "t") {
      if (fields.size() != 3 + 3 * n_tanks) corrupt("tick record has wrong field count");
      TickRecord rec;
      rec.tick = parse_field<std::uint64_t>(fields[1], "tick");
      if (rec.tick != file.ticks.size()) corrupt("tick records not contiguous at " + std::string(fields[1]));
      rec.state_hash = parse_hash(fields[2]);
      rec.actions.resize(n_tanks);
      for (std::size_t i = 0; i < n_tanks; ++i) {
        double v[3];
        for (int j = 0; j < 3; ++j) {
          v[j] = parse_field<double>(fields[3 + 3 * i + static_cast<std::size_t>(j)], "action");
          if (!(v[j] >= -1.0 && v[j] <= 1.0)) corrupt("action out of range at tick " + std::to_string(rec.tick));
        }
        rec.actions[i] = {v[0], v[1], v[2]};
      }
      file.ticks.push_back(std::move(rec));
      reader.commit();
    } else if (tag == "o") {
      if (fields.size() != 4) corrupt("observation record has wrong field count");
      ObservationRecord rec;
      rec.tick = parse_field<std::uint64_t>(fields[1], "tick");
      rec.tank = parse_field<TankId>(fields[2], "tank");
      rec.grid = base64_decode(fields[3]);
      if (rec.grid.size() != static_cast<std::size_t>(kObsCells)) corrupt("observation payload size");
      file.observations.push_back(std::move(rec));
      reader.commit();
    } else if (tag == "unfinalized") {
      if (reader.next(line)) corrupt("data after unfinalized marker");
      return file;
    } else if (tag == "end") {
      if (fields.size() != 2) corrupt("bad end record");
      TrajectoryFooter footer;
      footer.ticks = parse_field<std::uint64_t>(fields[1], "tick count");
      reader.commit();
      auto expect = [&](std::string_view prefix) {
        if (!reader.next(line)) corrupt("footer truncated");
        if (!line.starts_with(prefix)) corrupt("expected '" + std::string(prefix) + "' in footer");
        return std::string_view(line).substr(prefix.size());
      };
      footer.red_score = parse_field<int>(expect("score red "), "score");
      reader.commit();
      footer.blue_score = parse_field<int>(expect("score blue "), "score");
      reader.commit();
      footer.final_state_hash = parse_hash(expect("final_state "));
      reader.commit();
      for (std::size_t id = 0; id < n_tanks; ++id) {
        const auto parts = split(expect("components "));
        if (parts.size() != 5 || parse_field<std::size_t>(parts[0], "tank") != id) corrupt("bad components record");
        footer.components.push_back({parse_field<int>(parts[1], "count"), parse_field<int>(parts[2], "count"),
                                     parse_field<int>(parts[3], "count"), parse_field<int>(parts[4], "count")});
        reader.commit();
      }
      const std::uint64_t expected = reader.checksum();
      const std::uint64_t stored = parse_hash(expect("checksum "));
      if (stored != expected) corrupt("checksum mismatch");
      if (reader.next(line)) corrupt("data after checksum");
      if (footer.ticks != file.ticks.size()) corrupt("footer tick count disagrees with records");
      file.footer = std::move(footer);
      ended = true;
    } else {
      corrupt("unknown record '" + std::string(tag) + "'");
    }
  }
  return file;
}

TrajectoryFile load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open trajectory '" + path.string() + "'");
  return read_trajectory(in);
}

void write_trajectory(std::ostream& out, const TrajectoryFile& file) {
  TrajectoryWriter writer(out);
  writer.write_header(file.header);
  std::size_t next_obs = 0;
  for (const auto& tick : file.ticks) {
    while (next_obs < file.observations.size() && file.observations[next_obs].tick <= tick.tick) {
      writer.write_observation(file.observations[next_obs++]);
    }
    writer.write_tick(tick);
  }
  while (next_obs < file.observations.size()) writer.write_observation(file.observations[next_obs++]);
  if (file.footer) {
    writer.finalize(*file.footer);
  } else {
    writer.abort();
  }
}

// --- recording ---

EpisodeRecorder::EpisodeRecorder(Env& env, std::ostream& out, bool embed_observations, std::string created)
    : env_(env), writer_(out), embed_(embed_observations), created_(std::move(created)) {}

void EpisodeRecorder::begin() {
  TrajectoryHeader header{env_.config(), env_.seed(), created_, embed_};
  writer_.write_header(header);
  write_observations();
}

void EpisodeRecorder::write_observations() {
  if (!embed_ || env_.done()) return;
  const auto& world = env_.state();
  for (TankId id : env_.external_tanks()) {
    if (!world.tanks[id].alive) continue;
    writer_.write_observation({world.tick, id, env_.observation(id)->quantize()});
  }
}

void EpisodeRecorder::capture() {
  const auto& world = env_.state();
  writer_.write_tick({world.tick - 1, world.hash(), env_.last_actions()});
  write_observations();
}

void EpisodeRecorder::finish() {
  TrajectoryFooter footer;
  footer.ticks = env_.state().tick;
  footer.red_score = env_.info().red_score;
  footer.blue_score = env_.info().blue_score;
  footer.final_state_hash = env_.state().hash();
  footer.components = env_.scoreboard().totals();
  writer_.finalize(footer);
}

void EpisodeRecorder::abort() { writer_.abort(); }

// --- replay ---

std::string ReplayReport::summary() const {
  std::ostringstream out;
  out << (identical ? "identical" : "divergent") << "\tticks=" << ticks_replayed;
  if (first_divergent_tick) out << "\tfirst_divergent_tick=" << *first_divergent_tick;
  out << "\tfinal_state=" << hex64(actual_final_hash) << (expected_final_hash == actual_final_hash ? "" : "(expected " + hex64(expected_final_hash) + ")");
  out << "\tred=" << red_score << "\tblue=" << blue_score;
  if (!scores_match) out << "\tscores_mismatch";
  if (!components_match) out << "\tcomponents_mismatch";
  if (observation_mismatches > 0) out << "\tobservation_mismatches=" << observation_mismatches;
  return out.str();
}

ReplayReport replay(const TrajectoryFile& file) {
  if (!file.finalized()) throw Error(ErrorKind::CorruptFile, "corrupt file: trajectory is unfinalized");
  const TrajectoryFooter& footer = *file.footer;

  Env env(file.header.config, {.render_observations = false, .replay_mode = true});
  env.reset(file.header.seed);

  ReplayReport report;
  auto diverged = [&](std::uint64_t tick) {
    if (!report.first_divergent_tick) report.first_divergent_tick = tick;
  };
  std::size_t next_obs = 0;
  for (const auto& rec : file.ticks) {
    for (; next_obs < file.observations.size() && file.observations[next_obs].tick == rec.tick; ++next_obs) {
      const auto& o = file.observations[next_obs];
      const bool alive = o.tank < env.state().tanks.size() && env.state().tanks[o.tank].alive &&
                         env.state().tanks[o.tank].team != Team::Neutral;
      if (!alive || env.observation(o.tank)->quantize() != o.grid) {
        ++report.observation_mismatches;
        diverged(rec.tick);
      }
    }
    if (env.done()) {
      diverged(rec.tick);
      break;
    }
    ActionMap actions;
    for (std::size_t id = 0; id < rec.actions.size(); ++id) actions.emplace(static_cast<TankId>(id), rec.actions[id]);
    env.step_all(actions);
    ++report.ticks_replayed;
    if (env.state().hash() != rec.state_hash) diverged(rec.tick);
  }

  report.expected_final_hash = footer.final_state_hash;
  report.actual_final_hash = env.state().hash();
  const StepInfo info = env.info();
  report.red_score = info.red_score;
  report.blue_score = info.blue_score;
  report.scores_match = info.red_score == footer.red_score && info.blue_score == footer.blue_score;
  report.components_match = env.scoreboard().totals() == footer.components;
  if (report.ticks_replayed != footer.ticks) diverged(report.ticks_replayed);
  report.identical = !report.first_divergent_tick && report.expected_final_hash == report.actual_final_hash &&
                     report.scores_match && report.components_match && report.observation_mismatches == 0;
  if (!report.identical && !report.first_divergent_tick) report.first_divergent_tick = report.ticks_replayed;
  return report;
}

std::size_t collect_demonstrations(const TrajectoryFile& file, CloneModelBuilder& builder,
                                   const std::vector<TankId>& tanks) {
  Env env(file.header.config, {.render_observations = false, .replay_mode = true});
  env.reset(file.header.seed);
  const std::vector<TankId> chosen = tanks.empty() ? env.external_tanks() : tanks;
  std::size_t added = 0;
  for (const auto& rec : file.ticks) {
    if (env.done()) break;
    for (TankId id : chosen) {
      const auto& t = env.state().tanks.at(id);
      if (!t.alive || t.team == Team::Neutral) continue;
      builder.add(*env.observation(id), rec.actions.at(id));
      ++added;
    }
    ActionMap actions;
    for (std::size_t id = 0; id < rec.actions.size(); ++id) actions.emplace(static_cast<TankId>(id), rec.actions[id]);
    env.step_all(actions);
  }
  return added;
}

}  // namespace tanksworld
