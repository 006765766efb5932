#include "tanksworld/policies.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace tanksworld {

namespace {

constexpr double kSteerGain = 4.0 / std::numbers::pi;  // full lock at π/4 error
constexpr double kWaypointReached = 5.0;

double steer_toward(double bearing) { return std::clamp(kSteerGain * bearing, -1.0, 1.0); }

double throttle_for(double bearing) { return std::abs(bearing) < std::numbers::pi / 4.0 ? 1.0 : 0.3; }

Action random_action(Rng& rng) { return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}; }

/// Loop over the four quadrant centres.
class WaypointTracker {
 public:
  explicit WaypointTracker(double arena_side) {
    const double q = arena_side / 4.0;
    waypoints_ = {Vec2{q, q}, Vec2{3 * q, q}, Vec2{3 * q, 3 * q}, Vec2{q, 3 * q}};
  }

  Vec2 target(const Pose& self) {
    if (!started_) {
      started_ = true;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        const double d = distance(self.position(), waypoints_[i]);
        if (d < best) {
          best = d;
          index_ = i;
        }
      }
    }
    if (distance(self.position(), waypoints_[index_]) < kWaypointReached) index_ = (index_ + 1) % waypoints_.size();
    return waypoints_[index_];
  }

 private:
  std::array<Vec2, 4> waypoints_;
  std::size_t index_ = 0;
  bool started_ = false;
};

double fire_decision(const std::vector<Threat>& threats, double fire_range) {
  for (const auto& t : threats) {
    if (t.range <= fire_range && std::abs(t.bearing) <= kAimTolerance) return 1.0;
  }
  return -1.0;
}

class RandomPolicy final : public Policy {
 public:
  Action act(const AgentView&, Rng& rng) override { return random_action(rng); }
  std::string name() const override { return "random"; }
};

class PatrolPolicy final : public Policy {
 public:
  explicit PatrolPolicy(const PolicyContext& ctx) : ctx_(ctx), route_(ctx.arena_side) {}

  Action act(const AgentView& view, Rng&) override {
    const double bearing = bearing_to(view.self, route_.target(view.self));
    const double fire = view.observation ? fire_decision(visible_threats(*view.observation), ctx_.fire_range) : -1.0;
    return Action{throttle_for(bearing), steer_toward(bearing), fire}.clamped();
  }
  bool needs_observation() const override { return true; }
  std::string name() const override { return "patrol"; }

 private:
  PolicyContext ctx_;
  WaypointTracker route_;
};

class AggressivePolicy final : public Policy {
 public:
  explicit AggressivePolicy(const PolicyContext& ctx) : ctx_(ctx), route_(ctx.arena_side) {}

  Action act(const AgentView& view, Rng&) override {
    const auto threats = view.observation ? visible_threats(*view.observation) : std::vector<Threat>{};
    if (threats.empty()) {
      // Nothing in sight: sweep the arena.
      const double bearing = bearing_to(view.self, route_.target(view.self));
      return Action{throttle_for(bearing), steer_toward(bearing), -1.0}.clamped();
    }
    const Threat& target = threats.front();
    return Action{throttle_for(target.bearing), steer_toward(target.bearing), fire_decision(threats, ctx_.fire_range)}
        .clamped();
  }
  bool needs_observation() const override { return true; }
  std::string name() const override { return "aggressive"; }

 private:
  PolicyContext ctx_;
  WaypointTracker route_;
};

class NeutralDriver final : public Policy {
 public:
  Action act(const AgentView&, Rng& rng) override {
    if (ticks_ % kNeutralResampleTicks == 0) {
      throttle_ = rng.uniform(-1.0, 1.0);
      steer_ = rng.uniform(-1.0, 1.0);
    }
    ++ticks_;
    return {throttle_, steer_, -1.0};
  }
  std::string name() const override { return "neutral"; }

 private:
  std::uint64_t ticks_ = 0;
  double throttle_ = 0.0;
  double steer_ = 0.0;
};

class SkillWrapped final : public Policy {
 public:
  SkillWrapped(std::unique_ptr<Policy> inner, double skill)
      : inner_(std::move(inner)), skill_(skill), delay_(static_cast<int>(std::lround((1.0 - skill) * kMaxReactionDelay))) {}

  Action act(const AgentView& view, Rng& rng) override {
    if (!primed_) {
      history_.assign(static_cast<std::size_t>(delay_), view);
      primed_ = true;
    }
    history_.push_back(view);
    const AgentView delayed = history_.front();
    history_.pop_front();
    const Action a = inner_->act(delayed, rng).clamped();
    if (skill_ == 1.0) return a;
    const Action noise = random_action(rng);
    const double keep = skill_;
    const double mix = 1.0 - skill_;
    return Action{keep * a.throttle + mix * noise.throttle, keep * a.steer + mix * noise.steer,
                  keep * a.fire + mix * noise.fire}
        .clamped();
  }
  bool needs_observation() const override { return inner_->needs_observation(); }
  std::string name() const override { return inner_->name() + "@" + format_double(skill_); }

 private:
  std::unique_ptr<Policy> inner_;
  double skill_;
  int delay_;
  bool primed_ = false;
  std::deque<AgentView> history_;
};

class KnnClonePolicy final : public Policy {
 public:
  explicit KnnClonePolicy(std::shared_ptr<const CloneModel> model) : model_(std::move(model)) {}

  Action act(const AgentView& view, Rng&) override {
    if (!view.observation) return {};
    return model_->predict(extract_features(*view.observation)).clamped();
  }
  bool needs_observation() const override { return true; }
  std::string name() const override { return "clone"; }

 private:
  std::shared_ptr<const CloneModel> model_;
};

// --- little-endian helpers for the model file ---

void put_bytes(std::ostream& out, Fnv1a& h, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  h.update(data, n);
}

template <typename U>
void put_le(std::ostream& out, Fnv1a& h, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, h, b, sizeof(U));
}

void get_bytes(std::istream& in, Fnv1a& h, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw Error(ErrorKind::CorruptFile, "clone model truncated");
  h.update(data, n);
}

template <typename U>
U get_le(std::istream& in, Fnv1a& h) {
  unsigned char b[sizeof(U)];
  get_bytes(in, h, b, sizeof(U));
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

constexpr char kModelMagic[6] = {'T', 'W', 'K', 'N', 'N', '1'};

}  // namespace

std::vector<Threat> visible_threats(const Observation& obs) {
  const auto grid = obs.channel(Channel::Threats);
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::vector<int> stack;
  std::vector<Threat> out;
  for (int start = 0; start < static_cast<int>(grid.size()); ++start) {
    if (seen[start] || grid[start] < kBodyIntensity) continue;
    double sum_row = 0.0;
    double sum_col = 0.0;
    int count = 0;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const int cell = stack.back();
      stack.pop_back();
      const int row = cell / kObsSize;
      const int col = cell % kObsSize;
      sum_row += row;
      sum_col += col;
      ++count;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int r = row + dr;
          const int c = col + dc;
          if (r < 0 || r >= kObsSize || c < 0 || c >= kObsSize) continue;
          const int n = r * kObsSize + c;
          if (seen[n] || grid[n] < kBodyIntensity) continue;
          seen[n] = 1;
          stack.push_back(n);
        }
      }
    }
    const Vec2 p{(sum_col / count - kEgoPixel) * kPixelSize, (kEgoPixel - sum_row / count) * kPixelSize};
    out.push_back({p, norm(p), std::atan2(-p.x, p.y)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Threat& a, const Threat& b) { return a.range < b.range; });
  return out;
}

double bearing_to(const Pose& self, Vec2 target) {
  const Vec2 local = world_to_ego(target, self);
  return std::atan2(-local.x, local.y);
}

std::unique_ptr<Policy> make_random_policy() { return std::make_unique<RandomPolicy>(); }
std::unique_ptr<Policy> make_patrol_policy(const PolicyContext& ctx) { return std::make_unique<PatrolPolicy>(ctx); }
std::unique_ptr<Policy> make_aggressive_policy(const PolicyContext& ctx) {
  return std::make_unique<AggressivePolicy>(ctx);
}
std::unique_ptr<Policy> make_neutral_driver() { return std::make_unique<NeutralDriver>(); }

std::unique_ptr<Policy> degrade_skill(std::unique_ptr<Policy> inner, double skill) {
  if (!(skill >= 0.0 && skill <= 1.0)) {
    throw Error(ErrorKind::Config, "skill must lie in [0, 1], got " + format_double(skill));
  }
  return std::make_unique<SkillWrapped>(std::move(inner), skill);
}

std::vector<float> extract_features(const Observation& obs) {
  std::vector<float> out(kFeatureLength, 0.0f);
  constexpr float kScale = 1.0f / (kPoolFactor * kPoolFactor);
  std::size_t idx = 0;
  for (int c = 0; c < kObsChannels; ++c) {
    for (int pr = 0; pr < kPooledSize; ++pr) {
      for (int pc = 0; pc < kPooledSize; ++pc) {
        float sum = 0.0f;
        for (int r = 0; r < kPoolFactor; ++r) {
          for (int col = 0; col < kPoolFactor; ++col) {
            sum += obs.at(static_cast<Channel>(c), pr * kPoolFactor + r, pc * kPoolFactor + col);
          }
        }
        out[idx++] = sum * kScale;
      }
    }
  }
  return out;
}

std::vector<std::size_t> CloneModel::nearest(std::span<const float> query, std::size_t count) const {
  if (query.size() != feature_length) {
    throw Error(ErrorKind::Config, "clone query has " + std::to_string(query.size()) + " features, expected " +
                                       std::to_string(feature_length));
  }
  std::vector<double> dist(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto f = feature(i);
    double d = 0.0;
    for (std::size_t j = 0; j < feature_length; ++j) {
      const double diff = static_cast<double>(f[j]) - static_cast<double>(query[j]);
      d += diff * diff;
    }
    dist[i] = d;
  }
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; });
  order.resize(count);
  return order;
}

Action CloneModel::predict(std::span<const float> query) const {
  const auto idx = nearest(query, std::max<std::size_t>(1, k));
  Action sum;
  for (std::size_t i : idx) {
    sum.throttle += actions[i].throttle;
    sum.steer += actions[i].steer;
    sum.fire += actions[i].fire;
  }
  const double n = static_cast<double>(idx.size());
  // Rounding in the sum can push a mean past the neighbours' range.
  auto bounded = [&](double mean, double Action::*field) {
    double lo = actions[idx.front()].*field;
    double hi = lo;
    for (std::size_t i : idx) {
      lo = std::min(lo, actions[i].*field);
      hi = std::max(hi, actions[i].*field);
    }
    return std::clamp(mean, lo, hi);
  };
  return {bounded(sum.throttle / n, &Action::throttle), bounded(sum.steer / n, &Action::steer),
          bounded(sum.fire / n, &Action::fire)};
}

void CloneModelBuilder::add(const Observation& obs, const Action& action) {
  const auto f = extract_features(obs);
  features_.insert(features_.end(), f.begin(), f.end());
  actions_.push_back(action.clamped());
}

CloneModel CloneModelBuilder::build(int k) && {
  if (actions_.empty()) throw Error(ErrorKind::NoDemonstrations, "no demonstrations");
  if (k < 1) throw Error(ErrorKind::Config, "k must be >= 1");
  CloneModel model;
  model.k = static_cast<std::uint32_t>(k);
  model.features = std::move(features_);
  model.actions = std::move(actions_);
  return model;
}

CloneModel fit_knn_clone(std::span<const Demonstration> demos, int k) {
  CloneModelBuilder builder;
  for (const auto& demo : demos) {
    for (const auto& step : demo) builder.add(step.observation, step.action);
  }
  return std::move(builder).build(k);
}

std::unique_ptr<Policy> make_knn_clone(std::shared_ptr<const CloneModel> model) {
  if (!model || model->size() == 0) throw Error(ErrorKind::NoDemonstrations, "no demonstrations");
  return std::make_unique<KnnClonePolicy>(std::move(model));
}

void write_clone_model(std::ostream& out, const CloneModel& model) {
  Fnv1a h;
  put_bytes(out, h, kModelMagic, sizeof kModelMagic);
  put_le<std::uint32_t>(out, h, model.k);
  put_le<std::uint32_t>(out, h, model.feature_extractor);
  put_le<std::uint32_t>(out, h, static_cast<std::uint32_t>(model.feature_length));
  put_le<std::uint64_t>(out, h, model.size());
  for (float f : model.features) put_le<std::uint32_t>(out, h, std::bit_cast<std::uint32_t>(f));
  for (const auto& a : model.actions) {
    put_le<std::uint64_t>(out, h, std::bit_cast<std::uint64_t>(a.throttle));
    put_le<std::uint64_t>(out, h, std::bit_cast<std::uint64_t>(a.steer));
    put_le<std::uint64_t>(out, h, std::bit_cast<std::uint64_t>(a.fire));
  }
  const std::uint64_t digest = h.digest();
  Fnv1a ignored;
  put_le<std::uint64_t>(out, ignored, digest);
  if (!out) throw Error(ErrorKind::Io, "failed writing clone model");
}

CloneModel read_clone_model(std::istream& in) {
  Fnv1a h;
  char magic[sizeof kModelMagic];
  get_bytes(in, h, magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kModelMagic))) {
    throw Error(ErrorKind::UnsupportedVersion, "not a TWKNN1 clone model");
  }
  CloneModel model;
  model.k = get_le<std::uint32_t>(in, h);
  model.feature_extractor = get_le<std::uint32_t>(in, h);
  model.feature_length = get_le<std::uint32_t>(in, h);
  const std::uint64_t count = get_le<std::uint64_t>(in, h);
  if (model.feature_extractor != kFeatureAvgPool8 || model.feature_length != kFeatureLength) {
    throw Error(ErrorKind::UnsupportedVersion, "unsupported clone feature extractor");
  }
  if (count == 0 || model.k == 0) throw Error(ErrorKind::CorruptFile, "clone model is empty");
  if (count > (std::uint64_t{1} << 32)) throw Error(ErrorKind::CorruptFile, "clone model size implausible");
  model.features.resize(count * model.feature_length);
  for (auto& f : model.features) f = std::bit_cast<float>(get_le<std::uint32_t>(in, h));
  model.actions.resize(count);
  for (auto& a : model.actions) {
    a.throttle = std::bit_cast<double>(get_le<std::uint64_t>(in, h));
    a.steer = std::bit_cast<double>(get_le<std::uint64_t>(in, h));
    a.fire = std::bit_cast<double>(get_le<std::uint64_t>(in, h));
  }
  const std::uint64_t expected = h.digest();
  Fnv1a ignored;
  if (get_le<std::uint64_t>(in, ignored) != expected) throw Error(ErrorKind::CorruptFile, "clone model checksum mismatch");
  return model;
}

void save_clone_model(const std::filesystem::path& path, const CloneModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_clone_model(out, model);
}

CloneModel load_clone_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open clone model '" + path.string() + "'");
  return read_clone_model(in);
}

std::unique_ptr<Policy> make_policy(const ControlSpec& spec, const PolicyContext& ctx, CloneModelCache* cache) {
  std::unique_ptr<Policy> base;
  switch (spec.kind) {
    case ControlSpec::Kind::External:
      throw Error(ErrorKind::Config, "external tanks have no built-in policy");
    case ControlSpec::Kind::Scripted:
      if (spec.name == "random") base = make_random_policy();
      else if (spec.name == "patrol") base = make_patrol_policy(ctx);
      else if (spec.name == "aggressive") base = make_aggressive_policy(ctx);
      else throw Error(ErrorKind::Config, "unknown scripted policy '" + spec.name + "'");
      break;
    case ControlSpec::Kind::Clone: {
      std::shared_ptr<const CloneModel> model;
      if (cache) {
        auto& slot = (*cache)[spec.name];
        if (!slot) slot = std::make_shared<const CloneModel>(load_clone_model(spec.name));
        model = slot;
      } else {
        model = std::make_shared<const CloneModel>(load_clone_model(spec.name));
      }
      base = make_knn_clone(std::move(model));
      break;
    }
  }
  if (spec.skill == 1.0) return base;
  return degrade_skill(std::move(base), spec.skill);
}

}  // namespace tanksworld
