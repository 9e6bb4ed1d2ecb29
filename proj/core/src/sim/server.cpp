#include "kst/sim/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kst/sim/controller.hpp"

namespace kst::sim {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

int make_listener(const std::string& address, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw KstError(Errc::io, "socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw KstError(Errc::io, "bad bind address: " + address);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 4) != 0) {
    ::close(fd);
    throw KstError(Errc::io, "cannot bind " + address + ":" + std::to_string(port));
  }
  return fd;
}

std::uint16_t bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

}  // namespace

struct Server::Impl {
  explicit Impl(kin::RobotGeometry geometry, ServerOptions o)
      : opt(std::move(o)),
        controller(std::move(geometry),
                   SimController::Options{opt.virtual_time, opt.dt, opt.default_override}) {}

  // ---- connection ----------------------------------------------------

  struct Conn {
    int id = 0;
    int fd = -1;
    bool is_control = false;
    bool stream_state = false;  // tick thread only

    std::mutex m;
    std::condition_variable cv;
    std::deque<std::string> outbox;
    bool closing = false;  // writer drains then closes

    std::thread reader, writer;

    void push(std::string line) {
      {
        std::lock_guard lk(m);
        if (closing) return;
        outbox.push_back(std::move(line));
      }
      cv.notify_one();
    }
    void push_close() {
      {
        std::lock_guard lk(m);
        closing = true;
      }
      cv.notify_one();
    }
  };

  // ---- event queue ------------------------------------------------------

  struct Event {
    enum class Kind { frame, opened, closed, stop } kind = Kind::frame;
    int conn_id = 0;
    protocol::WireFrame frame;
  };

  void enqueue(Event ev) {
    {
      std::lock_guard lk(queue_m);
      queue.push_back(std::move(ev));
    }
    queue_cv.notify_one();
  }

  std::optional<Event> pop_until(std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lk(queue_m);
    if (!queue_cv.wait_until(lk, deadline, [&] { return !queue.empty(); })) return std::nullopt;
    Event ev = std::move(queue.front());
    queue.pop_front();
    return ev;
  }

  std::optional<Event> pop_blocking() {
    std::unique_lock lk(queue_m);
    queue_cv.wait(lk, [&] { return !queue.empty(); });
    Event ev = std::move(queue.front());
    queue.pop_front();
    return ev;
  }

  // ---- threads ---------------------------------------------------------

  void acceptor_loop(int listen_fd, bool control) {
    for (;;) {
      int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) return;  // listener closed
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

      std::lock_guard lk(conns_m);
      int& slot = control ? control_conn : side_conn;
      if (slot != 0 || shutting_down) {
        // one client at a time on each port
        const char* refusal = "0 ERR BAD_MODE\n";
        (void)!::write(fd, refusal, std::strlen(refusal));
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
        continue;
      }
      auto conn = std::make_shared<Conn>();
      conn->id = next_conn_id++;
      conn->fd = fd;
      conn->is_control = control;
      slot = conn->id;
      conns[conn->id] = conn;
      conn->writer = std::thread([this, conn] { writer_loop(conn); });
      conn->reader = std::thread([this, conn] { reader_loop(conn); });
    }
  }

  void reader_loop(std::shared_ptr<Conn> conn) {
    std::string buf;
    char chunk[65536];
    for (;;) {
      ssize_t n = ::read(conn->fd, chunk, sizeof chunk);
      if (n <= 0) break;
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t start = 0;
      for (;;) {
        std::size_t nl = buf.find('\n', start);
        if (nl == std::string::npos) break;
        std::string_view line(buf.data() + start, nl - start + 1);
        try {
          enqueue(Event{Event::Kind::frame, conn->id, protocol::decode_frame(line)});
        } catch (const KstError&) {
          conn->push("0 ERR BAD_ARGS\n");
        }
        start = nl + 1;
      }
      buf.erase(0, start);
      if (buf.size() > kMaxLine) break;  // unterminated garbage
    }
    enqueue(Event{Event::Kind::closed, conn->id, {}});
  }

  void writer_loop(std::shared_ptr<Conn> conn) {
    for (;;) {
      std::string line;
      {
        std::unique_lock lk(conn->m);
        conn->cv.wait(lk, [&] { return !conn->outbox.empty() || conn->closing; });
        if (conn->outbox.empty()) break;  // closing and drained
        line = std::move(conn->outbox.front());
        conn->outbox.pop_front();
      }
      std::size_t off = 0;
      while (off < line.size()) {
        ssize_t n = ::write(conn->fd, line.data() + off, line.size() - off);
        if (n <= 0) {
          conn->push_close();
          break;
        }
        off += static_cast<std::size_t>(n);
      }
    }
    ::shutdown(conn->fd, SHUT_RDWR);
  }

  // ---- tick thread -----------------------------------------------------

  std::shared_ptr<Conn> find_conn(int id) {
    std::lock_guard lk(conns_m);
    auto it = conns.find(id);
    return it == conns.end() ? nullptr : it->second;
  }

  std::shared_ptr<Conn> control() {
    std::lock_guard lk(conns_m);
    auto it = conns.find(control_conn);
    return it == conns.end() ? nullptr : it->second;
  }

  void send_response(int conn_id, const protocol::Response& r) {
    if (auto conn = find_conn(conn_id)) conn->push(protocol::encode_response(r));
  }

  void handle_event(const Event& ev) {
    if (ev.kind == Event::Kind::stop) {
      shutdown_requested = true;
      return;
    }
    if (ev.kind == Event::Kind::closed) {
      drop_conn(ev.conn_id);
      return;
    }
    if (ev.kind != Event::Kind::frame) return;

    // per-connection state streaming toggles live at the server layer
    if (ev.frame.tag == "streamState") {
      protocol::Response r{ev.frame.seq, protocol::Status::ok, {}, {}};
      auto conn = find_conn(ev.conn_id);
      if (ev.frame.args.size() != 1 || (ev.frame.args[0] != 0.0 && ev.frame.args[0] != 1.0)) {
        r.status = protocol::Status::err;
        r.err_code = std::string(wire_error_code(Errc::bad_args));
      } else if (conn) {
        conn->stream_state = ev.frame.args[0] == 1.0;
      }
      send_response(ev.conn_id, r);
      return;
    }

    SimController::Outcome out = controller.handle_command(ev.frame);
    if (out.deferred) pending_motion_conn = ev.conn_id;
    if (out.response) send_response(ev.conn_id, *out.response);
    if (out.close_conn) {
      if (auto conn = find_conn(ev.conn_id)) conn->push_close();
    }
    if (out.shutdown) shutdown_requested = true;
  }

  void drop_conn(int id) {
    std::shared_ptr<Conn> conn;
    {
      std::lock_guard lk(conns_m);
      auto it = conns.find(id);
      if (it == conns.end()) return;
      conn = it->second;
      conns.erase(it);
      if (control_conn == id) control_conn = 0;
      if (side_conn == id) side_conn = 0;
    }
    if (conn->is_control) {
      controller.on_control_disconnect();
      if (pending_motion_conn == id) pending_motion_conn = 0;
    }
    conn->push_close();
    reap.push_back(conn);  // joined on shutdown; fds already closed by the loops
  }

  void tick_loop() {
    using clock = std::chrono::steady_clock;
    const auto dt = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(opt.dt));
    auto next_tick = clock::now() + dt;
    while (!shutdown_requested) {
      std::optional<Event> ev =
          opt.virtual_time ? pop_blocking() : pop_until(next_tick);
      if (ev) {
        handle_event(*ev);
        continue;
      }
      controller.tick();
      next_tick += dt;
      const auto now = clock::now();
      if (now > next_tick + std::chrono::seconds(1)) next_tick = now + dt;  // stall resync
    }
  }

  // ---- lifecycle --------------------------------------------------------

  void start() {
    control_listen = make_listener(opt.bind_address, opt.control_port);
    side_listen = make_listener(opt.bind_address, opt.side_port);
    actual_control_port = bound_port(control_listen);
    actual_side_port = bound_port(side_listen);

    if (!opt.trace_path.empty()) {
      trace.open(opt.trace_path, std::ios::trunc);
      if (!trace) throw KstError(Errc::io, "cannot open trace file: " + opt.trace_path);
    }

    controller.set_response_sink([this](const protocol::Response& r) {
      if (pending_motion_conn != 0) send_response(pending_motion_conn, r);
      pending_motion_conn = 0;
    });
    controller.set_report_sink([this](const protocol::WireFrame& report) {
      if (auto conn = control()) conn->push(protocol::encode_frame(report));
    });
    controller.set_state_sink(
        [this](const RobotState& s, const kin::CartesianPose& pose) { on_tick_state(s, pose); });

    accept_control = std::thread([this] { acceptor_loop(control_listen, true); });
    accept_side = std::thread([this] { acceptor_loop(side_listen, false); });
    ticker = std::thread([this] { tick_loop(); });
  }

  void on_tick_state(const RobotState& s, const kin::CartesianPose& pose) {
    std::vector<std::shared_ptr<Conn>> subscribers;
    {
      std::lock_guard lk(conns_m);
      for (auto& [id, conn] : conns)
        if (conn->stream_state) subscribers.push_back(conn);
    }
    if (!subscribers.empty()) {
      protocol::WireFrame report;
      report.seq = static_cast<std::uint64_t>(s.tick_count);
      report.tag = "stateReport";
      report.args = {static_cast<double>(s.tick_count), static_cast<double>(static_cast<int>(s.mode))};
      report.args.insert(report.args.end(), s.q.begin(), s.q.end());
      const auto p = pose.to_array();
      report.args.insert(report.args.end(), p.begin(), p.end());
      const std::string line = protocol::encode_frame(report);
      for (auto& conn : subscribers) conn->push(line);
    }
    if (trace.is_open()) {
      nlohmann::json row;
      row["tick"] = s.tick_count;
      row["t"] = static_cast<double>(s.tick_count) * opt.dt;
      row["mode"] = mode_name(s.mode);
      row["q"] = s.q;
      row["eef"] = pose.to_array();
      switch (s.led()) {
        case Led::off: row["led"] = "OFF"; break;
        case Led::on: row["led"] = "ON"; break;
        case Led::flicker: row["led"] = "FLICKER"; break;
      }
      for (auto& [pin, level] : s.pins_out) row["pins_out"][std::to_string(pin)] = level ? 1 : 0;
      for (auto& [pin, level] : s.pins_in) row["pins_in"][std::to_string(pin)] = level ? 1 : 0;
      trace << row.dump() << '\n';
    }
  }

  void wait() {
    if (ticker.joinable()) ticker.join();
    // stop accepting, flush and close every connection
    shutting_down = true;
    if (control_listen >= 0) ::shutdown(control_listen, SHUT_RDWR), ::close(control_listen);
    if (side_listen >= 0) ::shutdown(side_listen, SHUT_RDWR), ::close(side_listen);
    if (accept_control.joinable()) accept_control.join();
    if (accept_side.joinable()) accept_side.join();

    std::vector<std::shared_ptr<Conn>> rest;
    {
      std::lock_guard lk(conns_m);
      for (auto& [id, conn] : conns) rest.push_back(conn);
      conns.clear();
    }
    for (auto& conn : rest) conn->push_close();
    for (auto& conn : rest) reap.push_back(conn);
    for (auto& conn : reap) {
      if (conn->writer.joinable()) conn->writer.join();
      ::shutdown(conn->fd, SHUT_RDWR);
      if (conn->reader.joinable()) conn->reader.join();
      ::close(conn->fd);
    }
    reap.clear();
    if (trace.is_open()) trace.close();
  }

  ServerOptions opt;
  SimController controller;

  int control_listen = -1, side_listen = -1;
  std::uint16_t actual_control_port = 0, actual_side_port = 0;

  std::mutex conns_m;
  std::map<int, std::shared_ptr<Conn>> conns;
  int control_conn = 0, side_conn = 0;
  int next_conn_id = 1;
  bool shutting_down = false;
  std::vector<std::shared_ptr<Conn>> reap;

  std::mutex queue_m;
  std::condition_variable queue_cv;
  std::deque<Event> queue;

  int pending_motion_conn = 0;
  std::atomic<bool> shutdown_requested = false;

  std::ofstream trace;
  std::thread accept_control, accept_side, ticker;
};

Server::Server(kin::RobotGeometry geometry, ServerOptions opt)
    : impl_(std::make_unique<Impl>(std::move(geometry), std::move(opt))) {}

Server::~Server() {
  if (impl_->ticker.joinable() || impl_->accept_control.joinable()) {
    request_stop();
    wait();
  }
}

void Server::start() { impl_->start(); }
void Server::wait() { impl_->wait(); }

void Server::run() {
  start();
  wait();
}

void Server::request_stop() {
  impl_->enqueue(Impl::Event{Impl::Event::Kind::stop, 0, {}});
}

std::uint16_t Server::control_port() const { return impl_->actual_control_port; }
std::uint16_t Server::side_port() const { return impl_->actual_side_port; }

}  // namespace kst::sim
