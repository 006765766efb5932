#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tanksworld/sensing.hpp"
#include "tanksworld/world.hpp"

namespace tanksworld {

inline constexpr int kObsChannels = 4;
inline constexpr int kObsSize = 128;
inline constexpr int kObsCells = kObsChannels * kObsSize * kObsSize;
/// World units per pixel; the grid spans 160 units around the ego tank.
inline constexpr double kPixelSize = 1.25;
/// Row/column whose pixel center coincides with the ego position.
inline constexpr int kEgoPixel = 64;

inline constexpr double kChassisWidth = 3.0;
inline constexpr double kChassisLength = 4.5;
inline constexpr int kHeadingRayPixels = 4;
inline constexpr float kBodyIntensity = 1.0f;
inline constexpr float kRayIntensity = 0.5f;
/// Neutrals carry position only and are drawn as discs of this radius.
inline constexpr double kNeutralMarkerRadius = kChassisWidth / 2.0;

enum class Channel : int { Allies = 0, Threats = 1, Neutrals = 2, Obstacles = 3 };

/// Channel-major 4×128×128 grid of values in [0, 1]. Row 0 is the far
/// edge ahead of the tank; columns grow to the tank's right.
class Observation {
 public:
  Observation() : data_(kObsCells, 0.0f) {}

  float at(Channel c, int row, int col) const { return data_[index(c, row, col)]; }
  float& at(Channel c, int row, int col) { return data_[index(c, row, col)]; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }
  std::span<const float> channel(Channel c) const {
    return std::span<const float>(data_).subspan(static_cast<std::size_t>(c) * kObsSize * kObsSize,
                                                 kObsSize * kObsSize);
  }
  void clear();

  /// Row-major 8-bit encoding, value = round(v·255).
  std::vector<std::uint8_t> quantize() const;
  static Observation dequantize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Observation&, const Observation&) = default;

 private:
  static std::size_t index(Channel c, int row, int col) {
    return (static_cast<std::size_t>(c) * kObsSize + static_cast<std::size_t>(row)) * kObsSize +
           static_cast<std::size_t>(col);
  }
  std::vector<float> data_;
};

/// Translate by -ego position, rotate by -ego heading. The result has the
/// ego heading along +y.
Vec2 world_to_ego(Vec2 point, const Pose& ego);

/// World-space geometry one observer is allowed to see, prior to
/// rasterization.
struct EgoScene {
  struct OrientedTank {
    Pose pose;
    Channel channel;
  };
  struct Disc {
    Vec2 center;
    double radius;
    Channel channel;
  };
  struct Segment {
    Vec2 a;
    Vec2 b;
    Channel channel;
  };

  Pose ego;
  std::vector<OrientedTank> tanks;
  std::vector<Disc> discs;
  std::vector<Segment> segments;

  /// Same scene after rotating the whole world by `rotation` about the
  /// origin and then translating it.
  EgoScene transformed(double rotation, Vec2 translation) const;
};

EgoScene build_scene(const WorldState& state, TankId tank_id, const VisibilitySet& vis);

/// A pixel is filled iff its center lies inside the shape. `pixel_offset`
/// shifts the sampling lattice by a fraction of a pixel.
void rasterize(const EgoScene& scene, Observation& out, Vec2 pixel_offset = {});
Observation rasterize(const EgoScene& scene, Vec2 pixel_offset = {});

/// Throws ObserverDead when the tank is dead.
Observation render_observation(const WorldState& state, TankId tank_id, const VisibilitySet& vis);
void render_observation(const WorldState& state, TankId tank_id, const VisibilitySet& vis, Observation& out);

}  // namespace tanksworld
