#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <thread>

#include "doctest.h"
#include "tanksworld/server.hpp"
#include "tanksworld/trajectory.hpp"

using namespace tanksworld;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using namespace std::chrono_literals;

namespace {

// Blocking WebSocket client whose reads give up after a timeout.
class Client {
 public:
  explicit Client(unsigned short port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send_raw(const std::string& text) { ws_.write(net::buffer(text)); }
  void send(twp::Body body) { send_raw(twp::encode({"s0", std::move(body)})); }

  /// Next message, or nullopt on timeout or close.
  std::optional<twp::Message> next(std::chrono::milliseconds timeout = 5s) {
    auto text = next_raw(timeout);
    if (!text) return std::nullopt;
    return twp::decode(*text);
  }

  std::optional<std::string> next_raw(std::chrono::milliseconds timeout = 5s) {
    beast::flat_buffer buffer;
    beast::error_code result = net::error::would_block;
    ws_.async_read(buffer, [&](beast::error_code ec, std::size_t) { result = ec; });
    ioc_.restart();
    ioc_.run_for(timeout);
    if (result == net::error::would_block) {
      ws_.next_layer().cancel();
      ioc_.restart();
      ioc_.run();
      closed_ = true;
      return std::nullopt;
    }
    if (result) {
      closed_ = true;
      return std::nullopt;
    }
    return beast::buffers_to_string(buffer.data());
  }

  /// Skips messages until one of type T arrives.
  template <typename T>
  std::optional<T> expect(std::chrono::milliseconds timeout = 5s) {
    const auto until = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < until) {
      auto m = next(std::chrono::duration_cast<std::chrono::milliseconds>(until - std::chrono::steady_clock::now()));
      if (!m) return std::nullopt;
      if (auto* body = std::get_if<T>(&m->body)) return *body;
    }
    return std::nullopt;
  }

  bool closed() const { return closed_; }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
  bool closed_ = false;
};

http::response<http::string_body> http_get(unsigned short port, const std::string& target) {
  net::io_context ioc;
  tcp::socket socket(ioc);
  tcp::resolver resolver(ioc);
  net::connect(socket, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(socket, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(socket, buffer, res);
  return res;
}

EnvConfig small_config(int max_steps) {
  EnvConfig c;
  c.max_steps = max_steps;
  c.seed = 11;
  return c;
}

ServerOptions quick_options(std::chrono::milliseconds barrier = 5000ms) {
  ServerOptions o;
  o.port = 0;
  o.barrier_timeout = barrier;
  return o;
}

std::vector<twp::ObsFrame> read_obs(Client& c, std::size_t n) {
  std::vector<twp::ObsFrame> out;
  while (out.size() < n) {
    auto f = c.expect<twp::ObsFrame>();
    if (!f) break;
    out.push_back(std::move(*f));
  }
  return out;
}

}  // namespace

TEST_SUITE("server") {
  TEST_CASE("claiming every external tank starts the episode") {
    Server server(small_config(50), quick_options());
    const auto port = server.start();
    Client agent(port);
    agent.send(twp::Hello{twp::Role::Agent, {}});
    const auto assigned = agent.expect<twp::Assigned>();
    REQUIRE(assigned);
    CHECK(assigned->tanks == std::vector<TankId>{0, 1, 2, 3, 4});
    CHECK(assigned->config.at("max_steps") == "50");

    auto frames = read_obs(agent, 5);
    REQUIRE(frames.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(frames[i].tick == 0);
      CHECK(frames[i].tank == i);
      CHECK(frames[i].grid.size() == 65536u);
      CHECK(frames[i].grid[64 * 128 + 64] == 255);
    }
    for (int tick = 0; tick < 3; ++tick) {
      for (TankId id = 0; id < 5; ++id) agent.send(twp::ActionMsg{static_cast<std::uint64_t>(tick), id, 0.5, 0.1, -1});
      frames = read_obs(agent, 5);
      REQUIRE(frames.size() == 5);
      CHECK(frames[0].tick == static_cast<std::uint64_t>(tick + 1));
    }
    CHECK(server.stats().ticks == 3);
    CHECK(server.stats().barrier_timeouts == 0);
    server.stop();
  }

  TEST_CASE("a missed barrier substitutes zero actions") {
    Server server(small_config(1000), quick_options(30ms));
    const auto port = server.start();
    Client agent(port);
    agent.send(twp::Hello{twp::Role::Agent, {}});
    REQUIRE(agent.expect<twp::Assigned>());
    std::uint64_t last = 0;
    for (int i = 0; i < 20; ++i) {
      auto f = agent.expect<twp::ObsFrame>();
      REQUIRE(f);
      last = f->tick;
    }
    CHECK(last >= 3);
    CHECK(server.stats().barrier_timeouts >= 3);
    server.stop();
  }

  TEST_CASE("viewers joining mid-episode see the state and cannot act") {
    Server server(small_config(1000), quick_options(20ms));
    const auto port = server.start();
    Client agent(port);
    agent.send(twp::Hello{twp::Role::Agent, {}});
    REQUIRE(agent.expect<twp::Assigned>());
    REQUIRE(agent.expect<twp::ObsFrame>());
    while (server.stats().ticks < 3) std::this_thread::sleep_for(5ms);

    Client viewer(port);
    viewer.send(twp::Hello{twp::Role::Viewer, {}});
    const auto assigned = viewer.expect<twp::Assigned>();
    REQUIRE(assigned);
    CHECK(assigned->tanks.empty());
    const auto state = viewer.expect<twp::StateFrame>();
    REQUIRE(state);
    CHECK(state->tick >= 3);
    CHECK(state->entities.size() == 12);
    CHECK(state->visibility.size() == 10);

    viewer.send(twp::ActionMsg{state->tick, 0, 1, 0, 1});
    const auto err = viewer.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kNotAllowed);
    server.stop();
  }

  TEST_CASE("claim conflicts and foreign tanks are refused") {
    Server server(small_config(100), quick_options());
    const auto port = server.start();
    Client first(port), second(port), third(port);
    first.send(twp::Hello{twp::Role::Agent, {0, 1}});
    REQUIRE(first.expect<twp::Assigned>());
    second.send(twp::Hello{twp::Role::Human, {1}});
    auto err = second.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kTankTaken);
    CHECK(err->text == "tank taken");

    third.send(twp::Hello{twp::Role::Agent, {7}});
    err = third.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kUnknownTank);

    // An empty human claim picks the lowest free tank.
    second.send(twp::Hello{twp::Role::Human, {}});
    const auto assigned = second.expect<twp::Assigned>();
    REQUIRE(assigned);
    CHECK(assigned->tanks == std::vector<TankId>{2});

    first.send(twp::ActionMsg{0, 3, 0, 0, 0});
    err = first.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kNotAllowed);
    server.stop();
  }

  TEST_CASE("stale ticks are reported") {
    Server server(small_config(100), quick_options());
    const auto port = server.start();
    Client agent(port);
    agent.send(twp::Hello{twp::Role::Agent, {}});
    REQUIRE(agent.expect<twp::Assigned>());
    agent.send(twp::ActionMsg{42, 0, 0, 0, 0});
    const auto err = agent.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kStaleTick);
    server.stop();
  }

  TEST_CASE("a version mismatch closes the connection") {
    Server server(small_config(100), quick_options());
    const auto port = server.start();
    Client c(port);
    c.send_raw(R"({"role":"viewer","session":"x","tanks":[],"type":"hello","v":"twp/9"})");
    const auto err = c.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kVersionMismatch);
    CHECK_FALSE(c.next(2s));
    CHECK(c.closed());
    server.stop();
  }

  TEST_CASE("a malformed frame is answered and the connection survives") {
    Server server(small_config(100), quick_options());
    const auto port = server.start();
    Client c(port);
    c.send_raw("{\"v\":\"twp/1\",\"type\":");
    auto err = c.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->code == twp::codes::kBadMessage);
    c.send_raw(R"({"role":"viewer","session":"x","tanks":[],"type":"hello","v":"twp/1","extra":1})");
    err = c.expect<twp::ErrorMsg>();
    REQUIRE(err);
    CHECK(err->text.find("extra") != std::string::npos);
    c.send(twp::Hello{twp::Role::Viewer, {}});
    CHECK(c.expect<twp::Assigned>());
    server.stop();
  }

  TEST_CASE("humans only see allies and what their tank perceives") {
    EnvConfig config = small_config(300);
    config.red_control = ControlSpec::scripted("aggressive");
    config.control_overrides[0] = ControlSpec::external();
    config.comm_range = 15.0;
    Server server(config, quick_options(10ms));
    const auto port = server.start();
    Client human(port);
    human.send(twp::Hello{twp::Role::Human, {}});
    const auto assigned = human.expect<twp::Assigned>();
    REQUIRE(assigned);
    REQUIRE(assigned->tanks == std::vector<TankId>{0});
    bool saw_hidden_enemy = false;
    for (int i = 0; i < 60; ++i) {
      const auto frame = human.expect<twp::StateFrame>();
      REQUIRE(frame);
      std::set<TankId> allowed;
      if (frame->visibility.contains(0)) {
        allowed.insert(frame->visibility.at(0).enemies.begin(), frame->visibility.at(0).enemies.end());
        allowed.insert(frame->visibility.at(0).neutrals.begin(), frame->visibility.at(0).neutrals.end());
      }
      CHECK(frame->visibility.size() <= 1);
      std::set<TankId> shown;
      for (const auto& e : frame->entities) {
        shown.insert(e.id);
        CHECK((e.team == Team::Red || allowed.contains(e.id)));
      }
      for (const auto& p : frame->projectiles) CHECK(shown.contains(p.shooter));
      saw_hidden_enemy = saw_hidden_enemy || shown.size() < 12;
      if (frame->done) break;
    }
    CHECK(saw_hidden_enemy);
    server.stop();
  }

  TEST_CASE("fully scripted matches start once a viewer says hello") {
    EnvConfig config = small_config(25);
    config.red_control = ControlSpec::scripted("patrol");
    ServerOptions options = quick_options();
    options.max_episodes = 1;
    Server server(config, options);
    const auto port = server.start();
    Client viewer(port);
    std::this_thread::sleep_for(50ms);
    CHECK(server.stats().ticks == 0);
    viewer.send(twp::Hello{twp::Role::Viewer, {}});
    std::optional<twp::StateFrame> last;
    while (auto f = viewer.expect<twp::StateFrame>()) {
      last = f;
      if (f->done) break;
    }
    REQUIRE(last);
    CHECK(last->done);
    CHECK(last->tick <= 25);
    server.wait();
    CHECK(server.stats().episodes_finished == 1);
  }

  TEST_CASE("recorded sessions replay identically") {
    const auto dir = std::filesystem::temp_directory_path() / "tanksworld_server_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ServerOptions options = quick_options(20ms);
    options.record_path = dir / "session.twtraj";
    options.record_observations = true;
    options.max_episodes = 2;
    Server server(small_config(30), options);
    const auto port = server.start();
    Client agent(port);
    agent.send(twp::Hello{twp::Role::Agent, {1, 3}});
    REQUIRE(agent.expect<twp::Assigned>());
    Client rest(port);
    rest.send(twp::Hello{twp::Role::Agent, {}});
    REQUIRE(rest.expect<twp::Assigned>());

    Rng rng(4);
    bool reset_sent = false;
    while (server.running()) {
      auto f = agent.expect<twp::ObsFrame>(3s);
      if (!f) break;
      if (f->done && !reset_sent) {
        agent.send(twp::Reset{99});
        reset_sent = true;
        continue;
      }
      if (f->alive && !f->done) agent.send(twp::ActionMsg{f->tick, f->tank, rng.uniform(-1, 1), rng.uniform(-1, 1), 1});
    }
    server.wait();
    const auto files = server.recordings();
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "session.twtraj");
    CHECK(files[1].filename() == "session-1.twtraj");
    for (const auto& path : files) {
      const auto traj = load_trajectory(path);
      CHECK(traj.finalized());
      CHECK(traj.header.embed_observations);
      const auto report = replay(traj);
      CHECK(report.identical);
    }
    CHECK(load_trajectory(files[1]).header.seed == 99);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("static files are served over plain HTTP") {
    const auto dir = std::filesystem::temp_directory_path() / "tanksworld_static_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir / "js");
    std::ofstream(dir / "index.html") << "<html>tanks</html>";
    std::ofstream(dir / "js" / "app.js") << "console.log(1);";
    ServerOptions options = quick_options();
    options.static_dir = dir;
    Server server(small_config(10), options);
    const auto port = server.start();

    auto res = http_get(port, "/");
    CHECK(res.result() == http::status::ok);
    CHECK(res.body() == "<html>tanks</html>");
    CHECK(std::string(res[http::field::content_type]).find("text/html") != std::string::npos);
    res = http_get(port, "/js/app.js");
    CHECK(res.result() == http::status::ok);
    CHECK(std::string(res[http::field::content_type]).find("javascript") != std::string::npos);
    CHECK(http_get(port, "/missing.css").result() == http::status::not_found);
    CHECK(http_get(port, "/../etc/passwd").result() != http::status::ok);

    // WebSocket upgrades still work on the same port.
    Client viewer(port);
    viewer.send(twp::Hello{twp::Role::Viewer, {}});
    CHECK(viewer.expect<twp::Assigned>());
    server.stop();
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("binding a taken port is an I/O error") {
    Server first(small_config(10), quick_options());
    const auto port = first.start();
    ServerOptions options = quick_options();
    options.port = port;
    Server second(small_config(10), options);
    try {
      second.start();
      FAIL("expected Io");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
    first.stop();
  }
}
