#include "tanksworld/core.hpp"

#include <bit>
#include <boost/beast/core/detail/base64.hpp>
#include <charconv>
#include <cstdio>

namespace tanksworld {

std::string_view team_name(Team team) {
  switch (team) {
    case Team::Red: return "red";
    case Team::Blue: return "blue";
    case Team::Neutral: return "neutral";
  }
  return "neutral";
}

Team parse_team(std::string_view name) {
  if (name == "red") return Team::Red;
  if (name == "blue") return Team::Blue;
  if (name == "neutral") return Team::Neutral;
  throw Error(ErrorKind::Config, "unknown team '" + std::string(name) + "'");
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, Stream kind, std::uint64_t index) {
  constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ULL;
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (static_cast<std::uint64_t>(kind) * kPhi);
  std::uint64_t b = splitmix64(t);
  std::uint64_t u = b ^ ((index + 1) * kPhi);
  return splitmix64(u);
}

void Fnv1a::update_f64(double v) {
  // Collapse -0.0 onto +0.0 so hashes depend on value, not sign of zero.
  if (v == 0.0) v = 0.0;
  update_u64(std::bit_cast<std::uint64_t>(v));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::CorruptFile, "bad hex value '" + std::string(s) + "'");
  }
  return v;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  namespace b64 = boost::beast::detail::base64;
  if (text.size() % 4 != 0) throw Error(ErrorKind::CorruptFile, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(b64::decoded_size(text.size()));
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  const auto body = text.size() - pad;
  const auto [written, read] = b64::decode(out.data(), text.data(), body);
  if (read != body) throw Error(ErrorKind::CorruptFile, "invalid base64 character");
  out.resize(written);
  return out;
}

}  // namespace tanksworld
