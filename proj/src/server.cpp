#include "tanksworld/server.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "tanksworld/env.hpp"
#include "tanksworld/trajectory.hpp"

namespace tanksworld {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

const char* mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".ico") return "image/vnd.microsoft.icon";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".txt") return "text/plain";
  return "application/octet-stream";
}

std::filesystem::path numbered_path(const std::filesystem::path& base, std::uint64_t n) {
  if (n == 0) return base;
  std::filesystem::path out = base.parent_path() / (base.stem().string() + "-" + std::to_string(n));
  out += base.extension();
  return out;
}

class Connection {
 public:
  virtual ~Connection() = default;
  virtual void shut() = 0;
};

}  // namespace

class WsSession;

struct Server::Impl {
  struct Event {
    enum class Kind { Open, Message, Close };
    Kind kind = Kind::Open;
    std::uint64_t conn = 0;
    std::weak_ptr<WsSession> session;
    twp::Message message;
  };

  struct Client {
    std::weak_ptr<WsSession> session;
    std::optional<twp::Role> role;
    std::vector<TankId> tanks;
  };

  Impl(EnvConfig cfg, ServerOptions opts)
      : config(std::move(cfg)), options(std::move(opts)), env(config, {.render_observations = false}) {
    if (options.session.empty()) options.session = "s" + std::to_string(config.seed);
    env.reset(config.seed);
  }

  // --- I/O thread side ---
  void do_accept();
  void register_connection(std::uint64_t id, std::weak_ptr<Connection> c);
  void unregister_connection(std::uint64_t id);
  void shutdown_io();

  void push(Event e) {
    {
      std::lock_guard lock(mu);
      inbox.push_back(std::move(e));
    }
    cv.notify_one();
  }

  // --- stepper thread side ---
  void stepper_loop();
  void handle(Event& e);
  void on_hello(std::uint64_t conn, Client& client, const twp::Hello& hello);
  void on_action(std::uint64_t conn, Client& client, const twp::ActionMsg& action);
  void on_reset(std::uint64_t conn, Client& client, const twp::Reset& reset);
  void on_close(std::uint64_t conn);
  void maybe_start();
  void start_episode();
  void try_advance();
  void do_step();
  bool barrier_ready() const;
  std::optional<Clock::time_point> wake_time() const;
  void send(std::uint64_t conn, twp::Body body, bool close_after = false);
  void send_frames(std::uint64_t conn, const Client& client);
  void broadcast_frames();
  twp::StateFrame state_frame(const Client* human) const;
  void request_stop();

  ~Impl() { destroying = true; }

  EnvConfig config;
  ServerOptions options;

  // Touched by connection destructors, which may run while ioc is torn
  // down, so these outlive it.
  bool destroying = false;
  std::map<std::uint64_t, std::weak_ptr<Connection>> connections;
  bool shutting_down = false;

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread stepper_thread;
  std::atomic<bool> stopping{false};
  std::atomic<std::uint64_t> next_conn{1};

  std::unique_ptr<net::steady_timer> shutdown_timer;

  std::mutex mu;
  std::condition_variable cv;
  std::deque<Event> inbox;

  mutable std::mutex stats_mu;
  ServerStats stats;
  std::vector<std::filesystem::path> recordings;

  // Owned by the stepper thread.
  Env env;
  std::map<std::uint64_t, Client> clients;
  std::map<TankId, std::uint64_t> owner;
  std::map<TankId, Action> pending;
  std::vector<bool> alive_before;
  std::vector<RewardComponents> deltas;
  bool running = false;
  bool episode_over = false;
  std::uint64_t episodes_started = 0;
  Clock::time_point deadline{};
  Clock::time_point last_step{};
  std::unique_ptr<std::ofstream> record_file;
  std::unique_ptr<EpisodeRecorder> recorder;
};

// --- WebSocket connection ---

class WsSession : public Connection, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Server::Impl& server, std::uint64_t id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  ~WsSession() override { server_.unregister_connection(id_); }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(1 << 20);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_.register_connection(self->id_, self);
      self->server_.push({Server::Impl::Event::Kind::Open, self->id_, self, {}});
      self->do_read();
    });
  }

  void send(std::string text, bool close_after) {
    if (closing_) return;
    queue_.push_back(std::move(text));
    if (close_after) closing_ = true;
    if (queue_.size() == 1) do_write();
  }

  void shut() override {
    if (closing_ && !queue_.empty()) return;
    closing_ = true;
    if (queue_.empty()) do_close();
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      server_.push({Server::Impl::Event::Kind::Close, id_, {}, {}});
      return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!closing_) {
      try {
        server_.push({Server::Impl::Event::Kind::Message, id_, {}, twp::decode(text)});
      } catch (const twp::DecodeError& e) {
        const auto code = e.version_mismatch() ? twp::codes::kVersionMismatch : twp::codes::kBadMessage;
        twp::Message reply{server_.options.session, twp::ErrorMsg{std::string(code), e.what()}};
        send(twp::encode(reply), e.version_mismatch());
      }
    }
    do_read();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->do_write();
      } else if (self->closing_) {
        self->do_close();
      }
    });
  }

  void do_close() {
    if (close_sent_) return;
    close_sent_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  Server::Impl& server_;
  std::uint64_t id_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool close_sent_ = false;
};

// --- plain HTTP connection (static files, WebSocket upgrade) ---

class HttpSession : public Connection, public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, Server::Impl& server, std::uint64_t id)
      : stream_(std::move(socket)), server_(server), id_(id) {}

  ~HttpSession() override { server_.unregister_connection(id_); }

  void run() {
    server_.register_connection(id_, shared_from_this());
    do_read();
  }

  void shut() override {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
    stream_.socket().close(ignored);
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec == http::error::end_of_stream) {
      shut();
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), server_, server_.next_conn++)->run(std::move(req_));
      return;
    }
    respond();
  }

  template <typename Body>
  void write(std::shared_ptr<http::response<Body>> res) {
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (res->need_eof()) {
        self->shut();
        return;
      }
      self->do_read();
    });
  }

  void write_text(http::status status, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, "text/plain");
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(body);
    res->prepare_payload();
    write(res);
  }

  void respond() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      write_text(http::status::method_not_allowed, "method not allowed\n");
      return;
    }
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (!server_.options.static_dir) {
      if (target == "/") {
        write_text(http::status::ok, "tanksworld server, protocol twp/1\n");
      } else {
        write_text(http::status::not_found, "not found\n");
      }
      return;
    }
    if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
      write_text(http::status::bad_request, "bad path\n");
      return;
    }
    if (target.back() == '/') target += "index.html";
    const std::filesystem::path path = *server_.options.static_dir / target.substr(1);

    http::file_body::value_type file;
    beast::error_code ec;
    file.open(path.string().c_str(), beast::file_mode::scan, ec);
    if (ec) {
      write_text(http::status::not_found, "not found\n");
      return;
    }
    const auto size = file.size();
    auto res = std::make_shared<http::response<http::file_body>>(
        std::piecewise_construct, std::make_tuple(std::move(file)), std::make_tuple(http::status::ok, req_.version()));
    res->set(http::field::content_type, mime_type(path));
    res->content_length(size);
    res->keep_alive(req_.keep_alive());
    if (req_.method() == http::verb::head) {
      auto head = std::make_shared<http::response<http::empty_body>>(http::status::ok, req_.version());
      head->set(http::field::content_type, mime_type(path));
      head->content_length(size);
      head->keep_alive(req_.keep_alive());
      write(head);
      return;
    }
    write(res);
  }

  beast::tcp_stream stream_;
  Server::Impl& server_;
  std::uint64_t id_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

// --- I/O thread ---

void Server::Impl::do_accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;
    {
      std::lock_guard lock(stats_mu);
      ++stats.connections;
    }
    std::make_shared<HttpSession>(std::move(socket), *this, next_conn++)->run();
    if (!shutting_down) do_accept();
  });
}

void Server::Impl::register_connection(std::uint64_t id, std::weak_ptr<Connection> c) { connections[id] = std::move(c); }

void Server::Impl::unregister_connection(std::uint64_t id) {
  if (destroying) return;
  connections.erase(id);
  if (shutting_down && connections.empty() && shutdown_timer) shutdown_timer->cancel();
}

void Server::Impl::shutdown_io() {
  if (shutting_down) return;
  shutting_down = true;
  beast::error_code ignored;
  acceptor.close(ignored);
  auto live = connections;
  for (auto& [id, weak] : live) {
    if (auto c = weak.lock()) c->shut();
  }
  if (connections.empty()) return;
  shutdown_timer = std::make_unique<net::steady_timer>(ioc, std::chrono::seconds(2));
  shutdown_timer->async_wait([this](beast::error_code ec) {
    if (!ec) ioc.stop();
  });
}

void Server::Impl::request_stop() {
  if (stopping.exchange(true)) return;
  cv.notify_all();
  net::post(ioc, [this] { shutdown_io(); });
}

// --- stepper thread ---

void Server::Impl::send(std::uint64_t conn, twp::Body body, bool close_after) {
  const auto it = clients.find(conn);
  if (it == clients.end()) return;
  std::string text = twp::encode({options.session, std::move(body)});
  net::post(ioc, [weak = it->second.session, text = std::move(text), close_after]() mutable {
    if (auto s = weak.lock()) s->send(std::move(text), close_after);
  });
}

twp::StateFrame Server::Impl::state_frame(const Client* human) const {
  const WorldState& world = env.state();
  twp::StateFrame frame;
  frame.tick = world.tick;
  frame.arena_side = world.arena_side;
  const StepInfo info = env.info();
  frame.red_score = info.red_score;
  frame.blue_score = info.blue_score;
  frame.done = env.done();
  for (const auto& o : world.obstacles) frame.obstacles.push_back({o.center.x, o.center.y, o.radius});

  std::set<TankId> shown;
  if (human == nullptr) {
    for (const auto& t : world.tanks) {
      shown.insert(t.id);
      if (t.alive && t.team != Team::Neutral) {
        const auto& v = env.visibility(t.id);
        frame.visibility[t.id] = {v.visible_enemies, v.visible_neutrals};
      }
      if (t.id < deltas.size()) frame.rewards[t.id] = deltas[t.id];
    }
  } else {
    std::set<Team> teams;
    for (TankId id : human->tanks) {
      teams.insert(world.tanks[id].team);
      if (id < deltas.size()) frame.rewards[id] = deltas[id];
      if (!world.tanks[id].alive) continue;
      const auto& v = env.visibility(id);
      frame.visibility[id] = {v.visible_enemies, v.visible_neutrals};
      shown.insert(v.visible_enemies.begin(), v.visible_enemies.end());
      shown.insert(v.visible_neutrals.begin(), v.visible_neutrals.end());
    }
    for (const auto& t : world.tanks) {
      if (teams.contains(t.team)) shown.insert(t.id);
    }
  }
  for (TankId id : shown) {
    const auto& t = world.tanks[id];
    frame.entities.push_back({t.id, t.team, t.pose.x, t.pose.y, t.pose.heading, t.alive});
  }
  for (const auto& p : world.projectiles) {
    if (human != nullptr && !shown.contains(p.shooter_id)) continue;
    frame.projectiles.push_back({p.shooter_id, p.pose.x, p.pose.y, p.pose.heading});
  }
  return frame;
}

void Server::Impl::send_frames(std::uint64_t conn, const Client& client) {
  if (!client.role) return;
  if (*client.role == twp::Role::Agent) {
    for (TankId id : client.tanks) {
      const bool alive = env.state().tanks[id].alive;
      if (!alive && !alive_before[id] && !env.done()) continue;
      twp::ObsFrame frame;
      frame.tick = env.state().tick;
      frame.tank = id;
      frame.alive = alive;
      frame.grid = alive ? env.observation(id)->quantize() : Observation().quantize();
      frame.reward = id < deltas.size() ? deltas[id] : RewardComponents{};
      frame.done = env.done();
      send(conn, std::move(frame));
    }
  } else {
    send(conn, state_frame(*client.role == twp::Role::Human ? &client : nullptr));
  }
}

void Server::Impl::broadcast_frames() {
  for (const auto& [conn, client] : clients) send_frames(conn, client);
}

void Server::Impl::on_hello(std::uint64_t conn, Client& client, const twp::Hello& hello) {
  if (client.role) {
    send(conn, twp::ErrorMsg{std::string(twp::codes::kBadMessage), "hello already received"});
    return;
  }
  std::vector<TankId> tanks;
  if (hello.role != twp::Role::Viewer) {
    const auto& external = env.external_tanks();
    tanks = hello.tanks;
    std::sort(tanks.begin(), tanks.end());
    tanks.erase(std::unique(tanks.begin(), tanks.end()), tanks.end());
    if (tanks.empty()) {
      for (TankId id : external) {
        if (owner.contains(id)) continue;
        tanks.push_back(id);
        if (hello.role == twp::Role::Human) break;
      }
      if (tanks.empty()) {
        send(conn, twp::ErrorMsg{std::string(twp::codes::kTankTaken), "tank taken"});
        return;
      }
    }
    for (TankId id : tanks) {
      if (!std::binary_search(external.begin(), external.end(), id)) {
        send(conn, twp::ErrorMsg{std::string(twp::codes::kUnknownTank),
                                 "tank " + std::to_string(id) + " is not externally controlled"});
        return;
      }
      if (owner.contains(id)) {
        send(conn, twp::ErrorMsg{std::string(twp::codes::kTankTaken), "tank taken"});
        return;
      }
    }
    for (TankId id : tanks) owner[id] = conn;
  }
  client.role = hello.role;
  client.tanks = tanks;
  send(conn, twp::Assigned{tanks, twp::config_echo(config)});
  if (running || episode_over) send_frames(conn, client);
  maybe_start();
}

void Server::Impl::on_action(std::uint64_t conn, Client& client, const twp::ActionMsg& action) {
  if (!client.role || *client.role == twp::Role::Viewer) {
    send(conn, twp::ErrorMsg{std::string(twp::codes::kNotAllowed), "this connection cannot act"});
    return;
  }
  if (!std::binary_search(client.tanks.begin(), client.tanks.end(), action.tank)) {
    send(conn, twp::ErrorMsg{std::string(twp::codes::kNotAllowed),
                             "tank " + std::to_string(action.tank) + " is not assigned to this connection"});
    return;
  }
  if (!running || action.tick != env.state().tick) {
    send(conn, twp::ErrorMsg{std::string(twp::codes::kStaleTick),
                             "action for tick " + std::to_string(action.tick) + " ignored"});
    return;
  }
  pending.emplace(action.tank, action.action());
}

void Server::Impl::on_reset(std::uint64_t conn, Client& client, const twp::Reset& reset) {
  if (!client.role || *client.role == twp::Role::Viewer) {
    send(conn, twp::ErrorMsg{std::string(twp::codes::kNotAllowed), "this connection cannot reset"});
    return;
  }
  if (recorder && running) recorder->abort();
  recorder.reset();
  record_file.reset();
  running = false;
  episode_over = false;
  env.reset(reset.seed);
  maybe_start();
}

void Server::Impl::on_close(std::uint64_t conn) {
  const auto it = clients.find(conn);
  if (it == clients.end()) return;
  for (TankId id : it->second.tanks) owner.erase(id);
  clients.erase(it);
}

void Server::Impl::maybe_start() {
  if (running || episode_over) return;
  const auto& external = env.external_tanks();
  if (external.empty()) {
    // Fully scripted matches start once someone is watching.
    if (clients.empty() || std::none_of(clients.begin(), clients.end(), [](const auto& c) { return c.second.role.has_value(); })) {
      return;
    }
  }
  for (TankId id : external) {
    if (!owner.contains(id)) return;
  }
  start_episode();
}

void Server::Impl::start_episode() {
  if (options.record_path) {
    const auto path = numbered_path(*options.record_path, episodes_started);
    record_file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (*record_file) {
      recorder = std::make_unique<EpisodeRecorder>(env, *record_file, options.record_observations,
                                                   "serve session " + options.session);
      recorder->begin();
      std::lock_guard lock(stats_mu);
      recordings.push_back(path);
    } else {
      record_file.reset();
    }
  }
  ++episodes_started;
  running = true;
  pending.clear();
  deltas.assign(env.state().tanks.size(), RewardComponents{});
  alive_before.clear();
  for (const auto& t : env.state().tanks) alive_before.push_back(t.alive);
  broadcast_frames();
  deadline = Clock::now() + options.barrier_timeout;
}

bool Server::Impl::barrier_ready() const {
  for (const auto& [id, conn] : owner) {
    if (env.state().tanks[id].alive && !pending.contains(id)) return false;
  }
  return true;
}

std::optional<Clock::time_point> Server::Impl::wake_time() const {
  if (!running) return std::nullopt;
  const Clock::time_point earliest = last_step + options.min_tick_interval;
  return std::max(barrier_ready() ? Clock::now() : deadline, earliest);
}

void Server::Impl::try_advance() {
  if (!running) return;
  const auto now = Clock::now();
  if (now < last_step + options.min_tick_interval) return;
  if (!barrier_ready() && now < deadline) return;
  do_step();
}

void Server::Impl::do_step() {
  bool substituted = false;
  ActionMap actions;
  for (TankId id : env.external_tanks()) {
    if (!env.state().tanks[id].alive) continue;
    if (auto it = pending.find(id); it != pending.end()) {
      actions.emplace(id, it->second);
    } else {
      actions.emplace(id, Action{});
      substituted |= owner.contains(id);
    }
  }
  alive_before.clear();
  for (const auto& t : env.state().tanks) alive_before.push_back(t.alive);
  const StepResult result = env.step(actions);
  if (recorder) recorder->capture();
  deltas.assign(env.state().tanks.size(), RewardComponents{});
  for (const auto& [id, c] : accumulate(result.events)) deltas[id] = c;
  pending.clear();
  last_step = Clock::now();
  {
    std::lock_guard lock(stats_mu);
    ++stats.ticks;
    if (substituted) ++stats.barrier_timeouts;
  }
  broadcast_frames();
  deadline = Clock::now() + options.barrier_timeout;
  if (result.done) {
    if (recorder) recorder->finish();
    recorder.reset();
    record_file.reset();
    running = false;
    episode_over = true;
    std::uint64_t finished = 0;
    {
      std::lock_guard lock(stats_mu);
      finished = ++stats.episodes_finished;
    }
    if (options.max_episodes > 0 && finished >= options.max_episodes) request_stop();
  }
}

void Server::Impl::handle(Event& e) {
  switch (e.kind) {
    case Event::Kind::Open:
      clients[e.conn].session = e.session;
      return;
    case Event::Kind::Close:
      on_close(e.conn);
      return;
    case Event::Kind::Message: break;
  }
  const auto it = clients.find(e.conn);
  if (it == clients.end()) return;
  Client& client = it->second;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, twp::Hello>) {
          on_hello(e.conn, client, body);
        } else if constexpr (std::is_same_v<T, twp::ActionMsg>) {
          on_action(e.conn, client, body);
        } else if constexpr (std::is_same_v<T, twp::Reset>) {
          on_reset(e.conn, client, body);
        } else {
          send(e.conn, twp::ErrorMsg{std::string(twp::codes::kNotAllowed),
                                     "clients may not send '" + std::string(twp::type_name(body)) + "' messages"});
        }
      },
      e.message.body);
}

void Server::Impl::stepper_loop() {
  while (!stopping) {
    std::deque<Event> batch;
    {
      std::unique_lock lock(mu);
      const auto wake = wake_time();
      auto pred = [this] { return stopping || !inbox.empty(); };
      if (wake) {
        cv.wait_until(lock, *wake, pred);
      } else {
        cv.wait(lock, pred);
      }
      batch.swap(inbox);
    }
    if (stopping) break;
    for (auto& e : batch) handle(e);
    try_advance();
  }
  if (recorder && running) recorder->abort();
}

// --- public interface ---

Server::Server(EnvConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  Impl& s = *impl_;
  try {
    const tcp::endpoint endpoint(net::ip::make_address(s.options.host), s.options.port);
    s.acceptor.open(endpoint.protocol());
    s.acceptor.set_option(net::socket_base::reuse_address(true));
    s.acceptor.bind(endpoint);
    s.acceptor.listen(net::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorKind::Io, "cannot listen on " + s.options.host + ":" + std::to_string(s.options.port) + ": " +
                                   e.what());
  }
  const unsigned short port = s.acceptor.local_endpoint().port();
  s.do_accept();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  s.stepper_thread = std::thread([&s] { s.stepper_loop(); });
  return port;
}

void Server::stop() {
  if (!impl_) return;
  impl_->request_stop();
  wait();
}

void Server::wait() {
  if (impl_->stepper_thread.joinable()) impl_->stepper_thread.join();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
}

bool Server::running() const { return !impl_->stopping; }

ServerStats Server::stats() const {
  std::lock_guard lock(impl_->stats_mu);
  return impl_->stats;
}

std::vector<std::filesystem::path> Server::recordings() const {
  std::lock_guard lock(impl_->stats_mu);
  return impl_->recordings;
}

}  // namespace tanksworld
