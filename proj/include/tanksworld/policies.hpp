#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tanksworld/config.hpp"
#include "tanksworld/observation.hpp"

namespace tanksworld {

/// What a controller sees on one tick.
struct AgentView {
  std::shared_ptr<const Observation> observation;  // null when the policy does not need one
  Pose self;
  std::uint64_t tick = 0;
};

/// Arena facts scripted policies need.
struct PolicyContext {
  double arena_side = 100.0;
  /// Engagement distance: 80% of projectile range.
  double fire_range = 40.0;

  static PolicyContext from(const PhysicsParams& physics) {
    return {physics.arena_side, 0.8 * physics.projectile_range()};
  }
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Always returns a clamped action. Deterministic in (internal state,
  /// view, rng position).
  virtual Action act(const AgentView& view, Rng& rng) = 0;
  virtual bool needs_observation() const { return false; }
  virtual std::string name() const = 0;
};

/// A blob of threat-channel body pixels, located in the ego frame.
struct Threat {
  Vec2 ego_position;
  double range = 0.0;
  /// Angle from straight ahead, positive to the left.
  double bearing = 0.0;
};

/// Connected groups of full-intensity pixels in the threat channel,
/// nearest first.
std::vector<Threat> visible_threats(const Observation& obs);

/// Bearing error (positive = turn left) from `self` toward a world point.
double bearing_to(const Pose& self, Vec2 target);

inline constexpr double kAimTolerance = 0.1;
inline constexpr int kNeutralResampleTicks = 20;
inline constexpr int kMaxReactionDelay = 5;

std::unique_ptr<Policy> make_random_policy();
std::unique_ptr<Policy> make_patrol_policy(const PolicyContext& ctx);
std::unique_ptr<Policy> make_aggressive_policy(const PolicyContext& ctx);
std::unique_ptr<Policy> make_neutral_driver();
/// Blends the inner action with uniform noise and delays its input by
/// round((1 - skill)·5) ticks. Throws ErrorKind::Config for skill outside [0, 1].
std::unique_ptr<Policy> degrade_skill(std::unique_ptr<Policy> inner, double skill);

// --- behaviour cloning ---

inline constexpr std::uint32_t kFeatureAvgPool8 = 1;
inline constexpr int kPoolFactor = 8;
inline constexpr int kPooledSize = kObsSize / kPoolFactor;
inline constexpr std::size_t kFeatureLength = static_cast<std::size_t>(kObsChannels) * kPooledSize * kPooledSize;

/// 8×8 average pooling of every channel, flattened channel-major.
std::vector<float> extract_features(const Observation& obs);

struct CloneModel {
  std::uint32_t k = 1;
  std::uint32_t feature_extractor = kFeatureAvgPool8;
  std::size_t feature_length = kFeatureLength;
  std::vector<float> features;  // size() × feature_length, row-major
  std::vector<Action> actions;

  std::size_t size() const { return actions.size(); }
  std::span<const float> feature(std::size_t i) const {
    return std::span<const float>(features).subspan(i * feature_length, feature_length);
  }
  /// Indices of the `count` nearest stored features, nearest first; equal
  /// distances keep the earlier index first.
  std::vector<std::size_t> nearest(std::span<const float> query, std::size_t count) const;
  /// Component-wise mean action of the k nearest neighbours.
  Action predict(std::span<const float> query) const;
};

struct DemoStep {
  Observation observation;
  Action action;
};
using Demonstration = std::vector<DemoStep>;

/// Accumulates (observation, action) pairs without keeping observations.
class CloneModelBuilder {
 public:
  void add(const Observation& obs, const Action& action);
  std::size_t size() const { return actions_.size(); }
  /// Throws NoDemonstrations when empty.
  CloneModel build(int k) &&;

 private:
  std::vector<float> features_;
  std::vector<Action> actions_;
};

CloneModel fit_knn_clone(std::span<const Demonstration> demos, int k);

std::unique_ptr<Policy> make_knn_clone(std::shared_ptr<const CloneModel> model);

/// Binary model file, little-endian:
///   "TWKNN1" | u32 k | u32 extractor | u32 feature_len | u64 count |
///   count·feature_len f32 | count·3 f64 (throttle, steer, fire) |
///   u64 FNV-1a of every preceding byte
void write_clone_model(std::ostream& out, const CloneModel& model);
CloneModel read_clone_model(std::istream& in);
void save_clone_model(const std::filesystem::path& path, const CloneModel& model);
CloneModel load_clone_model(const std::filesystem::path& path);

using CloneModelCache = std::map<std::string, std::shared_ptr<const CloneModel>>;

/// Builds a controller for a scripted or clone ControlSpec. Clone models
/// are loaded once per path when a cache is supplied.
std::unique_ptr<Policy> make_policy(const ControlSpec& spec, const PolicyContext& ctx,
                                    CloneModelCache* cache = nullptr);

}  // namespace tanksworld
