#include "tanksworld/observation.hpp"

#include <algorithm>
#include <cmath>

namespace tanksworld {

namespace {

// Pixel lattice relative to the ego frame.
class Lattice {
 public:
  explicit Lattice(Vec2 pixel_offset) : ox_(pixel_offset.x * kPixelSize), oy_(pixel_offset.y * kPixelSize) {}

  Vec2 center(int row, int col) const {
    return {(col - kEgoPixel) * kPixelSize + ox_, (kEgoPixel - row) * kPixelSize + oy_};
  }

  // Visit every pixel whose center could fall inside the ego-frame box.
  template <typename Fn>
  void for_box(double x_lo, double x_hi, double y_lo, double y_hi, Fn&& fn) const {
    const int col_lo = std::max(0, static_cast<int>(std::ceil((x_lo - ox_) / kPixelSize + kEgoPixel)));
    const int col_hi = std::min(kObsSize - 1, static_cast<int>(std::floor((x_hi - ox_) / kPixelSize + kEgoPixel)));
    const int row_lo = std::max(0, static_cast<int>(std::ceil(kEgoPixel - (y_hi - oy_) / kPixelSize)));
    const int row_hi = std::min(kObsSize - 1, static_cast<int>(std::floor(kEgoPixel - (y_lo - oy_) / kPixelSize)));
    for (int row = row_lo; row <= row_hi; ++row) {
      for (int col = col_lo; col <= col_hi; ++col) fn(row, col, center(row, col));
    }
  }

  // Pixel nearest to an ego-frame point, if inside the grid.
  bool nearest(Vec2 p, int& row, int& col) const {
    col = static_cast<int>(std::lround((p.x - ox_) / kPixelSize + kEgoPixel));
    row = static_cast<int>(std::lround(kEgoPixel - (p.y - oy_) / kPixelSize));
    return row >= 0 && row < kObsSize && col >= 0 && col < kObsSize;
  }

 private:
  double ox_;
  double oy_;
};

void paint(Observation& out, Channel c, int row, int col, float v) {
  float& cell = out.at(c, row, col);
  cell = std::max(cell, v);
}

void draw_tank(const Lattice& lattice, const Pose& ego, const EgoScene::OrientedTank& tank, Observation& out) {
  const Vec2 center = world_to_ego(tank.pose.position(), ego);
  const double rel = tank.pose.heading - ego.heading;
  const Vec2 fwd = heading_vector(rel);
  const Vec2 right{std::cos(rel), std::sin(rel)};
  const double hw = kChassisWidth / 2.0;
  const double hl = kChassisLength / 2.0;
  const double ex = std::abs(right.x) * hw + std::abs(fwd.x) * hl;
  const double ey = std::abs(right.y) * hw + std::abs(fwd.y) * hl;

  lattice.for_box(center.x - ex, center.x + ex, center.y - ey, center.y + ey, [&](int row, int col, Vec2 p) {
    const Vec2 local = p - center;
    if (std::abs(dot(local, right)) <= hw && std::abs(dot(local, fwd)) <= hl) {
      paint(out, tank.channel, row, col, kBodyIntensity);
    }
  });
  const Vec2 nose = center + fwd * hl;
  for (int k = 0; k < kHeadingRayPixels; ++k) {
    int row = 0;
    int col = 0;
    if (lattice.nearest(nose + fwd * ((k + 0.5) * kPixelSize), row, col)) {
      paint(out, tank.channel, row, col, kRayIntensity);
    }
  }
}

void draw_disc(const Lattice& lattice, const Pose& ego, const EgoScene::Disc& disc, Observation& out) {
  const Vec2 center = world_to_ego(disc.center, ego);
  const double r = disc.radius;
  lattice.for_box(center.x - r, center.x + r, center.y - r, center.y + r, [&](int row, int col, Vec2 p) {
    if (norm_sq(p - center) <= r * r) paint(out, disc.channel, row, col, kBodyIntensity);
  });
}

void draw_segment(const Lattice& lattice, const Pose& ego, const EgoScene::Segment& seg, Observation& out) {
  const Vec2 a = world_to_ego(seg.a, ego);
  const Vec2 b = world_to_ego(seg.b, ego);
  const double len = distance(a, b);
  const int samples = static_cast<int>(std::ceil(len / (0.5 * kPixelSize))) + 1;
  for (int i = 0; i < samples; ++i) {
    const double t = samples > 1 ? static_cast<double>(i) / (samples - 1) : 0.0;
    int row = 0;
    int col = 0;
    if (lattice.nearest(a + (b - a) * t, row, col)) paint(out, seg.channel, row, col, kBodyIntensity);
  }
}

Vec2 rotate(Vec2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {p.x * c - p.y * s, p.x * s + p.y * c};
}

}  // namespace

void Observation::clear() { std::fill(data_.begin(), data_.end(), 0.0f); }

std::vector<std::uint8_t> Observation::quantize() const {
  std::vector<std::uint8_t> out(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(data_[i], 0.0f, 1.0f) * 255.0f));
  }
  return out;
}

Observation Observation::dequantize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != static_cast<std::size_t>(kObsCells)) {
    throw Error(ErrorKind::CorruptFile, "observation payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                                            std::to_string(kObsCells));
  }
  Observation obs;
  for (std::size_t i = 0; i < bytes.size(); ++i) obs.data_[i] = static_cast<float>(bytes[i]) / 255.0f;
  return obs;
}

Vec2 world_to_ego(Vec2 point, const Pose& ego) {
  const Vec2 d = point - ego.position();
  const double c = std::cos(ego.heading);
  const double s = std::sin(ego.heading);
  return {d.x * c + d.y * s, -d.x * s + d.y * c};
}

EgoScene EgoScene::transformed(double rotation, Vec2 translation) const {
  auto move = [&](Vec2 p) { return rotate(p, rotation) + translation; };
  auto move_pose = [&](const Pose& p) {
    const Vec2 q = move(p.position());
    return Pose{q.x, q.y, normalize_angle(p.heading + rotation)};
  };
  EgoScene out = *this;
  out.ego = move_pose(ego);
  for (auto& t : out.tanks) t.pose = move_pose(t.pose);
  for (auto& d : out.discs) d.center = move(d.center);
  for (auto& s : out.segments) {
    s.a = move(s.a);
    s.b = move(s.b);
  }
  return out;
}

EgoScene build_scene(const WorldState& state, TankId tank_id, const VisibilitySet& vis) {
  if (tank_id >= state.tanks.size() || !state.tanks[tank_id].alive) {
    throw Error(ErrorKind::ObserverDead, "observer dead: tank " + std::to_string(tank_id));
  }
  const TankState& me = state.tanks[tank_id];
  EgoScene scene;
  scene.ego = me.pose;
  for (const auto& t : state.tanks) {
    if (t.alive && t.team == me.team) scene.tanks.push_back({t.pose, Channel::Allies});
  }
  for (TankId id : vis.visible_enemies) {
    const auto& t = state.tanks.at(id);
    if (t.alive) scene.tanks.push_back({t.pose, Channel::Threats});
  }
  for (TankId id : vis.visible_neutrals) {
    const auto& t = state.tanks.at(id);
    if (t.alive) scene.discs.push_back({t.pose.position(), kNeutralMarkerRadius, Channel::Neutrals});
  }
  for (const auto& o : state.obstacles) scene.discs.push_back({o.center.position(), o.radius, Channel::Obstacles});
  const double s = state.arena_side;
  const Vec2 corners[4] = {{0.0, 0.0}, {s, 0.0}, {s, s}, {0.0, s}};
  for (int i = 0; i < 4; ++i) scene.segments.push_back({corners[i], corners[(i + 1) % 4], Channel::Obstacles});
  return scene;
}

void rasterize(const EgoScene& scene, Observation& out, Vec2 pixel_offset) {
  out.clear();
  const Lattice lattice(pixel_offset);
  for (const auto& d : scene.discs) draw_disc(lattice, scene.ego, d, out);
  for (const auto& s : scene.segments) draw_segment(lattice, scene.ego, s, out);
  for (const auto& t : scene.tanks) draw_tank(lattice, scene.ego, t, out);
}

Observation rasterize(const EgoScene& scene, Vec2 pixel_offset) {
  Observation out;
  rasterize(scene, out, pixel_offset);
  return out;
}

void render_observation(const WorldState& state, TankId tank_id, const VisibilitySet& vis, Observation& out) {
  rasterize(build_scene(state, tank_id, vis), out);
}

Observation render_observation(const WorldState& state, TankId tank_id, const VisibilitySet& vis) {
  Observation out;
  render_observation(state, tank_id, vis, out);
  return out;
}

}  // namespace tanksworld
