#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tanksworld {

using TankId = std::uint32_t;

enum class Team : std::uint8_t { Red = 0, Blue = 1, Neutral = 2 };

std::string_view team_name(Team team);
Team parse_team(std::string_view name);

/// The opposing combat team. Neutral has no opponent and maps to itself.
constexpr Team opponent(Team team) {
  switch (team) {
    case Team::Red: return Team::Blue;
    case Team::Blue: return Team::Red;
    default: return Team::Neutral;
  }
}

enum class ErrorKind {
  Config,
  ArenaOvercrowded,
  IncompleteActionMap,
  EpisodeFinished,
  ObserverDead,
  NoDemonstrations,
  Io,
  UnsupportedVersion,
  CorruptFile,
  Protocol,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2π).
inline double normalize_angle(double a) {
  if (a >= 0.0 && a < kTwoPi) return a;
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a tiny negative number can round up to exactly 2π.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

/// Wraps an angle into (-π, π].
inline double wrap_pi(double a) {
  a = std::remainder(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm_sq(Vec2 a) { return dot(a, a); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Unit forward vector for a heading. Heading 0 faces world +y and heading
/// increases counter-clockwise, so heading π/2 faces world -x.
inline Vec2 heading_vector(double heading) { return {-std::sin(heading), std::cos(heading)}; }

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Named RNG streams. Every subsystem draws from its own stream so that
/// changing one consumer never perturbs another.
enum class Stream : std::uint64_t {
  Placement = 1,
  NeutralDriver = 2,
  Policy = 3,
  Driver = 4,
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for stream `kind`, instance `index`, derived from an episode seed.
/// Rule: s = seed; a = splitmix64(s); b = splitmix64 of (a ^ kind·φ);
/// result = splitmix64 of (b ^ (index + 1)·φ), with φ = 0x9E3779B97F4A7C15.
std::uint64_t derive_stream_seed(std::uint64_t seed, Stream kind, std::uint64_t index = 0);

/// mt19937_64 with a portable real-valued mapping (the standard
/// distributions are implementation-defined, which breaks cross-platform
/// replay).
class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= kPrime;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    update(b, 8);
  }
  void update_f64(double v);

  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = kOffset;
};

std::string hex64(std::uint64_t v);
/// Strict inverse of hex64 (any length up to 16 digits). Throws CorruptFile.
std::uint64_t parse_hex64(std::string_view s);

/// Standard padded base64.
std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws Error(CorruptFile) for malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace tanksworld
