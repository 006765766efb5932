#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tanksworld/config.hpp"
#include "tanksworld/env.hpp"
#include "tanksworld/policies.hpp"

namespace tanksworld {

// Text container, one record per line (docs/formats.md):
//
//   TANKSWORLD-TRAJ v1
//   created <free text>
//   seed <u64>
//   embed_observations <0|1>
//   config <key> = <value>          (canonical EnvConfig lines)
//   begin
//   o <tick> <tank> <base64 grid>   (optional; observation seen at <tick>)
//   t <tick> <state hash> <throttle> <steer> <fire> ...   (every tank, id order)
//   ...
//   end <ticks>
//   score red <int>
//   score blue <int>
//   final_state <hash>
//   components <id> <enemy> <ally> <neutral> <died>     (every tank)
//   checksum <hash>
//
// An aborted recording ends with `unfinalized <ticks>` instead of the
// footer. Hashes are 16 lowercase hex digits. The checksum is FNV-1a 64
// over every byte that precedes the checksum line.

inline constexpr std::string_view kTrajectoryMagic = "TANKSWORLD-TRAJ v1";
inline constexpr std::string_view kTrajectoryExtension = ".twtraj";

struct TrajectoryHeader {
  EnvConfig config;
  std::uint64_t seed = 0;
  std::string created;
  bool embed_observations = false;
};

struct TickRecord {
  std::uint64_t tick = 0;
  /// World hash after this tick's actions were applied.
  std::uint64_t state_hash = 0;
  std::vector<Action> actions;  // every tank, id order
};

struct ObservationRecord {
  std::uint64_t tick = 0;
  TankId tank = 0;
  std::vector<std::uint8_t> grid;  // Observation::quantize()
};

struct TrajectoryFooter {
  std::uint64_t ticks = 0;
  int red_score = 0;
  int blue_score = 0;
  std::uint64_t final_state_hash = 0;
  std::vector<RewardComponents> components;  // every tank, id order
};

struct TrajectoryFile {
  TrajectoryHeader header;
  std::vector<TickRecord> ticks;
  std::vector<ObservationRecord> observations;
  std::optional<TrajectoryFooter> footer;  // empty when unfinalized

  bool finalized() const { return footer.has_value(); }
};

/// Streams records to `out` as they are produced.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(out) {}

  void write_header(const TrajectoryHeader& header);
  void write_observation(const ObservationRecord& record);
  void write_tick(const TickRecord& record);
  void finalize(const TrajectoryFooter& footer);
  /// Marks the file unfinalized. Safe to call after an I/O error.
  void abort();

  std::uint64_t ticks_written() const { return ticks_; }
  bool closed() const { return closed_; }

 private:
  void emit(const std::string& line);

  std::ostream& out_;
  Fnv1a checksum_;
  std::uint64_t ticks_ = 0;
  bool closed_ = false;
};

/// Throws UnsupportedVersion or CorruptFile.
TrajectoryFile read_trajectory(std::istream& in);
TrajectoryFile load_trajectory(const std::filesystem::path& path);
void write_trajectory(std::ostream& out, const TrajectoryFile& file);

/// Logs an Env episode. Call begin() right after reset, capture() after
/// every step, then finish() (or abort()).
class EpisodeRecorder {
 public:
  EpisodeRecorder(Env& env, std::ostream& out, bool embed_observations = false, std::string created = {});

  void begin();
  void capture();
  void finish();
  void abort();

 private:
  void write_observations();

  Env& env_;
  TrajectoryWriter writer_;
  bool embed_;
  std::string created_;
};

struct ReplayReport {
  bool identical = false;
  std::optional<std::uint64_t> first_divergent_tick;
  std::uint64_t ticks_replayed = 0;
  std::uint64_t expected_final_hash = 0;
  std::uint64_t actual_final_hash = 0;
  int red_score = 0;
  int blue_score = 0;
  bool scores_match = false;
  bool components_match = false;
  std::size_t observation_mismatches = 0;

  std::string summary() const;
};

/// Rebuilds the episode from the file alone and compares it record by
/// record. Throws for unfinalized files.
ReplayReport replay(const TrajectoryFile& file);

/// Replays the file and feeds (observation, action) pairs of `tanks`
/// (default: the file's external tanks) into `builder`. Returns the
/// number of pairs added.
std::size_t collect_demonstrations(const TrajectoryFile& file, CloneModelBuilder& builder,
                                   const std::vector<TankId>& tanks = {});

}  // namespace tanksworld
