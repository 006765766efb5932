// Command-line front end: run, bench, serve, record, replay, fit-clone.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "tanksworld/env.hpp"
#include "tanksworld/server.hpp"
#include "tanksworld/trajectory.hpp"

namespace tw = tanksworld;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDivergent = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitProtocol = 5;

std::atomic<bool> g_interrupted{false};

int exit_code_for(tw::ErrorKind kind) {
  switch (kind) {
    case tw::ErrorKind::Config:
    case tw::ErrorKind::ArenaOvercrowded:
    case tw::ErrorKind::NoDemonstrations: return kExitConfig;
    case tw::ErrorKind::Io:
    case tw::ErrorKind::UnsupportedVersion:
    case tw::ErrorKind::CorruptFile: return kExitIo;
    case tw::ErrorKind::Protocol: return kExitProtocol;
    default: return 1;
  }
}

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_' || c == '.') c = '-';
  }
  return "--" + key;
}

bool is_flag_key(const std::string& key) {
  return key == "two_hop_only" || key == "neutral_always_visible" || key == "team_includes_ally_kills";
}

// EnvConfig options shared by every subcommand, mirrored one-to-one from
// the config keys.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::vector<std::string>> values;
  std::vector<std::string> overrides;  // ID=SPEC
  std::string red;
  std::string blue;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "Config file of `key = value` lines")->check(CLI::ExistingFile);
    for (const auto& key : tw::EnvConfig::keys()) {
      auto* opt = app.add_option(flag_name(key), values[key], "Config key " + key);
      if (is_flag_key(key)) {
        opt->expected(0, 1);
      } else {
        opt->expected(1);
      }
    }
    app.add_option("--red", red, "Controller for red tanks (alias of --control-red)");
    app.add_option("--blue", blue, "Controller for blue tanks (alias of --control-blue)");
    app.add_option("--control", overrides, "Per-tank controller override ID=SPEC");
  }

  tw::EnvConfig build(CLI::App& app) const {
    tw::EnvConfig config = config_file.empty() ? tw::EnvConfig{} : tw::load_config_file(config_file);
    for (const auto& key : tw::EnvConfig::keys()) {
      if (app.count(flag_name(key)) == 0) continue;
      const auto& v = values.at(key);
      config.set(key, v.empty() ? "true" : v.back());
    }
    if (!red.empty()) config.set("control.red", red);
    if (!blue.empty()) config.set("control.blue", blue);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw tw::Error(tw::ErrorKind::Config, "--control expects ID=SPEC, got '" + o + "'");
      config.set("control." + o.substr(0, eq), o.substr(eq + 1));
    }
    config.validate();
    return config;
  }
};

std::string components_fields(std::string_view team, const tw::RewardComponents& c) {
  std::ostringstream out;
  out << team << "_enemy_kills=" << c.enemy_kills << '\t' << team << "_ally_kills=" << c.ally_kills << '\t' << team
      << "_neutral_kills=" << c.neutral_kills << '\t' << team << "_deaths=" << c.died;
  return out.str();
}

std::string episode_line(std::size_t index, const tw::EpisodeSummary& s) {
  std::ostringstream out;
  out << "episode=" << index << "\tseed=" << s.seed << "\tticks=" << s.ticks << "\tred=" << s.red_score
      << "\tblue=" << s.blue_score << "\tend=" << tw::status_name(s.status) << '\t'
      << components_fields("red", s.red_totals) << '\t' << components_fields("blue", s.blue_totals);
  return out.str();
}

fs::path episode_path(const fs::path& dir, std::uint64_t seed) {
  return dir / ("episode-" + std::to_string(seed) + std::string(tw::kTrajectoryExtension));
}

tw::EpisodeSummary run_one(const tw::EnvConfig& config, std::uint64_t seed, const std::optional<fs::path>& record_dir,
                           bool embed) {
  tw::Env env(config, {.render_observations = false});
  env.reset(seed);
  if (!record_dir) return tw::play_out(env);

  const fs::path path = episode_path(*record_dir, seed);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw tw::Error(tw::ErrorKind::Io, "cannot write '" + path.string() + "'");
  tw::EpisodeRecorder recorder(env, out, embed, "run seed " + std::to_string(seed));
  try {
    recorder.begin();
    const auto summary = tw::play_out(env, [&] { recorder.capture(); });
    recorder.finish();
    return summary;
  } catch (...) {
    recorder.abort();
    throw;
  }
}

int cmd_run(const tw::EnvConfig& config, std::size_t episodes, std::size_t parallel,
            const std::optional<fs::path>& record_dir, bool embed) {
  if (record_dir) fs::create_directories(*record_dir);
  parallel = std::max<std::size_t>(1, parallel);
  std::vector<tw::EpisodeSummary> results(episodes);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < episodes;) {
      try {
        results[i] = run_one(config, config.seed + i, record_dir, embed);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  if (parallel == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::min(parallel, episodes); ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t i = 0; i < episodes; ++i) std::cout << episode_line(i, results[i]) << '\n';
  return kExitOk;
}

int cmd_bench(tw::EnvConfig config, double seconds, bool observe) {
  config.red_control = tw::ControlSpec::external();
  config.blue_control = tw::ControlSpec::external();
  config.control_overrides.clear();
  tw::Env env(config, {.render_observations = observe});
  std::uint64_t seed = config.seed;
  env.reset(seed);
  auto driver = std::make_unique<tw::RandomDriver>(env);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto budget = std::chrono::duration<double>(seconds);
  std::uint64_t steps = 0;
  std::uint64_t observations = 0;
  while (Clock::now() - start < budget) {
    for (int burst = 0; burst < 64; ++burst) {
      if (env.done()) {
        env.reset(++seed);
        driver = std::make_unique<tw::RandomDriver>(env);
      }
      const auto result = env.step(driver->act(env));
      ++steps;
      if (observe) observations += result.agents.size();
    }
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  char line[256];
  std::snprintf(line, sizeof line,
                "steps=%llu\tseconds=%.3f\tsteps_per_sec=%.1f\tobservations_per_sec=%.1f\tobserve=%d",
                static_cast<unsigned long long>(steps), elapsed, steps / elapsed, observations / elapsed,
                observe ? 1 : 0);
  std::cout << line << '\n';
  return kExitOk;
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  unsigned short port = tw::twp::kDefaultPort;
  int barrier_ms = 100;
  int tick_interval_ms = 0;
  std::string static_dir;
  std::string record;
  bool embed = false;
  std::uint64_t episodes = 0;

  void attach(CLI::App& app, bool recording) {
    app.add_option("--host", host, "Address to bind");
    app.add_option("--port", port, "TCP port (0 picks a free one)");
    app.add_option("--barrier-timeout", barrier_ms, "Step barrier timeout in ms")->check(CLI::NonNegativeNumber);
    app.add_option("--tick-interval", tick_interval_ms, "Minimum ms between ticks")->check(CLI::NonNegativeNumber);
    app.add_option("--static", static_dir, "Directory served over HTTP")->check(CLI::ExistingDirectory);
    auto* rec = app.add_option(recording ? "--out" : "--record", record, "Trajectory file for recorded episodes");
    if (recording) rec->required();
    app.add_flag("--embed-observations", embed, "Embed 8-bit observations in recordings");
    app.add_option("--episodes", episodes, "Stop after this many episodes (0 = never)");
  }

  tw::ServerOptions options() const {
    tw::ServerOptions o;
    o.host = host;
    o.port = port;
    o.barrier_timeout = std::chrono::milliseconds(barrier_ms);
    o.min_tick_interval = std::chrono::milliseconds(tick_interval_ms);
    if (!static_dir.empty()) o.static_dir = static_dir;
    if (!record.empty()) o.record_path = record;
    o.record_observations = embed;
    o.max_episodes = episodes;
    return o;
  }
};

int cmd_serve(const tw::EnvConfig& config, const tw::ServerOptions& options) {
  tw::Server server(config, options);
  const unsigned short port = server.start();
  std::cout << "listening\thost=" << options.host << "\tport=" << port << "\tsession="
            << (options.session.empty() ? "s" + std::to_string(config.seed) : options.session) << std::endl;
  std::signal(SIGINT, [](int) { g_interrupted = true; });
  std::signal(SIGTERM, [](int) { g_interrupted = true; });
  while (server.running() && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  const auto stats = server.stats();
  std::cout << "stopped\tticks=" << stats.ticks << "\tepisodes=" << stats.episodes_finished
            << "\tbarrier_timeouts=" << stats.barrier_timeouts << '\n';
  for (const auto& path : server.recordings()) std::cout << "recorded\tfile=" << path.string() << '\n';
  return kExitOk;
}

int cmd_replay(const std::vector<std::string>& files) {
  int code = kExitOk;
  for (const auto& file : files) {
    const auto report = tw::replay(tw::load_trajectory(file));
    std::cout << "file=" << file << '\t' << report.summary() << '\n';
    if (!report.identical) code = kExitDivergent;
  }
  return code;
}

int cmd_fit_clone(const std::vector<std::string>& files, int k, const std::vector<tw::TankId>& tanks,
                  const std::string& out) {
  tw::CloneModelBuilder builder;
  std::size_t samples = 0;
  for (const auto& file : files) samples += tw::collect_demonstrations(tw::load_trajectory(file), builder, tanks);
  const auto model = std::move(builder).build(k);
  tw::save_clone_model(out, model);
  std::cout << "samples=" << samples << "\tk=" << k << "\tout=" << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headless tank combat environment"};
  app.require_subcommand(1);

  ConfigFlags run_cfg, bench_cfg, serve_cfg, record_cfg;

  auto* run = app.add_subcommand("run", "Run headless episodes and print one report line each");
  run_cfg.attach(*run);
  std::size_t episodes = 1;
  std::size_t parallel = 1;
  std::string record_dir;
  bool embed = false;
  run->add_option("--episodes", episodes, "Number of episodes (seeds seed, seed+1, ...)");
  run->add_option("--parallel", parallel, "Episodes stepped concurrently")->check(CLI::PositiveNumber);
  run->add_option("--record", record_dir, "Directory receiving one trajectory per episode");
  run->add_flag("--embed-observations", embed, "Embed 8-bit observations in recordings");

  auto* bench = app.add_subcommand("bench", "Measure stepping throughput with random actions");
  bench_cfg.attach(*bench);
  double seconds = 2.0;
  bool observe = true;
  bench->add_option("--duration", seconds, "Wall-clock budget in seconds")->check(CLI::PositiveNumber);
  bench->add_flag("--observe,!--no-observe", observe, "Render observations (default on)");

  auto* serve = app.add_subcommand("serve", "Host the environment over the twp/1 WebSocket protocol");
  serve_cfg.attach(*serve);
  ServeFlags serve_flags;
  serve_flags.attach(*serve, false);

  auto* record = app.add_subcommand("record", "Serve one human-paced episode at 10 ticks/s and record it");
  record_cfg.attach(*record);
  ServeFlags record_flags;
  record_flags.tick_interval_ms = 100;
  record_flags.episodes = 1;
  record_flags.attach(*record, true);

  auto* replay = app.add_subcommand("replay", "Re-simulate trajectory files and compare");
  std::vector<std::string> replay_files;
  replay->add_option("files", replay_files, "Trajectory files")->required()->check(CLI::ExistingFile);

  auto* fit = app.add_subcommand("fit-clone", "Fit a k-NN behaviour clone from trajectory files");
  std::vector<std::string> fit_files;
  int k = 1;
  std::vector<tw::TankId> fit_tanks;
  std::string model_out;
  fit->add_option("files", fit_files, "Trajectory files")->required()->check(CLI::ExistingFile);
  fit->add_option("--k", k, "Neighbours averaged per prediction")->check(CLI::PositiveNumber);
  fit->add_option("--tanks", fit_tanks, "Demonstrator tank ids (default: the external tanks)")->delimiter(',');
  fit->add_option("--out", model_out, "Model file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      const auto config = run_cfg.build(*run);
      return cmd_run(config, episodes, parallel, record_dir.empty() ? std::nullopt : std::optional<fs::path>(record_dir),
                     embed);
    }
    if (*bench) return cmd_bench(bench_cfg.build(*bench), seconds, observe);
    if (*serve) return cmd_serve(serve_cfg.build(*serve), serve_flags.options());
    if (*record) return cmd_serve(record_cfg.build(*record), record_flags.options());
    if (*replay) return cmd_replay(replay_files);
    if (*fit) return cmd_fit_clone(fit_files, k, fit_tanks, model_out);
  } catch (const tw::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
