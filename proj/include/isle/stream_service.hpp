#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "isle/codestream.hpp"
#include "isle/error.hpp"
#include "isle/scorer.hpp"
#include "isle/wire.hpp"

namespace isle {

// ---------------------------------------------------------------------------
// Sockets

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void close() {
    if (fd_ >= 0) ::close(std::exchange(fd_, -1));
  }

  void shutdown() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  void write_all(ByteView data) const {
    std::size_t sent = 0;
    while (sent < data.size()) {
      const auto n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) fail(ErrorKind::network, std::string("send failed: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(n);
    }
  }

  /// Reads exactly `out.size()` bytes. Returns false on clean EOF before the
  /// first byte; throws on EOF mid-frame.
  bool read_exact(std::span<std::uint8_t> out) const {
    std::size_t got = 0;
    while (got < out.size()) {
      const auto n = ::recv(fd_, out.data() + got, out.size() - got, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) fail(ErrorKind::network, std::string("recv failed: ") + std::strerror(errno));
      if (n == 0) {
        if (got == 0) return false;
        fail(ErrorKind::network, "connection closed mid-frame");
      }
      got += static_cast<std::size_t>(n);
    }
    return true;
  }

 private:
  int fd_ = -1;
};

struct HostPort {
  std::string host;
  std::string port;
};

inline HostPort split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    fail(ErrorKind::validation, "address must be host:port, got '" + address + "'");
  }
  auto host = address.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {host.empty() ? "0.0.0.0" : host, address.substr(colon + 1)};
}

namespace detail {

struct AddrInfoDeleter {
  void operator()(addrinfo* p) const { freeaddrinfo(p); }
};

inline std::unique_ptr<addrinfo, AddrInfoDeleter> resolve(const HostPort& hp, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  if (const int rc = getaddrinfo(hp.host.c_str(), hp.port.c_str(), &hints, &result); rc != 0) {
    fail(ErrorKind::network, "cannot resolve " + hp.host + ":" + hp.port + ": " + gai_strerror(rc));
  }
  return std::unique_ptr<addrinfo, AddrInfoDeleter>(result);
}

}  // namespace detail

inline Socket connect_to(const std::string& address) {
  const auto hp = split_address(address);
  const auto info = detail::resolve(hp, false);
  for (auto* ai = info.get(); ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) continue;
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return s;
    }
  }
  fail(ErrorKind::network, "cannot connect to " + address + ": " + std::strerror(errno));
}

// ---------------------------------------------------------------------------
// Server

/// Loads every `<asset_id>.islc` in a directory. Fails on the first file that
/// does not parse, naming it.
inline std::map<std::string, Codestream> load_store(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(ErrorKind::io, "store is not a directory: " + dir.string());
  std::map<std::string, Codestream> store;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".islc") continue;
    const auto id = entry.path().stem().string();
    try {
      store.emplace(id, parse(read_file(entry.path())));
    } catch (const Error& e) {
      throw Error(e.kind(), entry.path().filename().string() + ": " + e.what());
    }
  }
  return store;
}

/// Answers one request against a read-only store. Pure function of its inputs.
inline std::pair<wire::Status, Bytes> handle_request(const std::map<std::string, Codestream>& store,
                                                     const wire::Request& req) {
  using wire::Status;
  auto message = [](std::string_view s) { return to_bytes(s); };
  if (req.opcode == wire::Opcode::list) {
    std::string ids;
    for (const auto& [id, cs] : store) ids += id + "\n";
    return {Status::ok, to_bytes(ids)};
  }
  const auto it = store.find(req.asset_id);
  if (it == store.end()) return {Status::not_found, message("unknown asset " + req.asset_id)};
  const auto& cs = it->second;
  if (req.opcode == wire::Opcode::head) return {Status::ok, serialize_metadata(cs)};
  if (req.d == wire::kFullStream) return {Status::ok, serialize(cs)};
  if (req.d > cs.max_available_d()) {
    return {Status::range, message("decomposition " + std::to_string(req.d) + " beyond stored maximum " +
                                   std::to_string(cs.max_available_d()))};
  }
  return {Status::ok, serialize(truncate(cs, req.d))};
}

class StreamServer {
 public:
  explicit StreamServer(std::map<std::string, Codestream> store) : store_(std::move(store)) {}
  explicit StreamServer(const std::filesystem::path& store_dir) : store_(load_store(store_dir)) {}

  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;
  ~StreamServer() { stop(); }

  const std::map<std::string, Codestream>& store() const { return store_; }

  /// Binds and starts accepting. Port 0 picks an ephemeral port.
  void start(const std::string& bind_address) {
    const auto hp = split_address(bind_address);
    const auto info = detail::resolve(hp, true);
    for (auto* ai = info.get(); ai; ai = ai->ai_next) {
      Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!s.valid()) continue;
      int one = 1;
      ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
      if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), 64) == 0) {
        listener_ = std::move(s);
        break;
      }
    }
    if (!listener_.valid()) fail(ErrorKind::network, "cannot bind " + bind_address + ": " + std::strerror(errno));

    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                             : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  std::uint16_t port() const { return port_; }

  void stop() {
    if (!running_.exchange(false)) return;
    listener_.shutdown();
    if (acceptor_.joinable()) acceptor_.join();
    listener_.close();
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mutex_);
      for (auto& [id, fd] : live_fds_) ::shutdown(fd, SHUT_RDWR);
      workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
  }

 private:
  void accept_loop() {
    std::uint64_t next_id = 0;
    while (running_) {
      const int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        break;
      }
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      std::lock_guard lock(mutex_);
      if (!running_) {
        ::close(fd);
        break;
      }
      const auto id = next_id++;
      live_fds_[id] = fd;
      workers_.emplace_back([this, fd, id] {
        Socket conn(fd);
        serve_connection(conn);
        std::lock_guard inner(mutex_);
        live_fds_.erase(id);  // before `conn` closes the descriptor
      });
    }
  }

  void serve_connection(const Socket& conn) const {
    try {
      for (;;) {
        std::array<std::uint8_t, wire::kRequestFixedBytes> fixed{};
        if (!conn.read_exact(fixed)) return;
        const auto prefix = wire::decode_request_prefix(fixed);
        if (!prefix) {
          respond(conn, wire::Status::bad_request, to_bytes("bad request magic"));
          return;  // framing is lost
        }
        std::string asset_id(prefix->asset_id_len, '\0');
        std::uint8_t d_byte = 0;
        if (!conn.read_exact({reinterpret_cast<std::uint8_t*>(asset_id.data()), asset_id.size()}) ||
            !conn.read_exact({&d_byte, 1})) {
          return;
        }
        const auto d = static_cast<std::int8_t>(d_byte);
        if (const auto bad = wire::validate_request(*prefix, asset_id, d)) {
          respond(conn, *bad, to_bytes("malformed request"));
          continue;
        }
        const auto [status, payload] =
            handle_request(store_, {static_cast<wire::Opcode>(prefix->opcode), std::move(asset_id), d});
        respond(conn, status, payload);
      }
    } catch (const Error&) {
      // Peer went away; nothing to report to.
    }
  }

  static void respond(const Socket& conn, wire::Status status, ByteView payload) {
    auto frame = wire::encode_response_header(status, payload.size());
    frame.insert(frame.end(), payload.begin(), payload.end());
    conn.write_all(frame);
  }

  std::map<std::string, Codestream> store_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::map<std::uint64_t, int> live_fds_;
  std::vector<std::thread> workers_;
};

// ---------------------------------------------------------------------------
// Client

struct Response {
  wire::Status status = wire::Status::ok;
  Bytes payload;
  std::uint64_t frame_bytes = 0;  // header + payload as received
};

/// One persistent connection; requests are answered in order.
class StreamClient {
 public:
  explicit StreamClient(const std::string& address) : socket_(connect_to(address)) {}

  Response request(const wire::Request& req) {
    socket_.write_all(wire::encode_request(req));
    std::array<std::uint8_t, wire::kResponseHeaderBytes> header{};
    if (!socket_.read_exact(header)) fail(ErrorKind::network, "server closed the connection");
    const auto h = wire::decode_response_header(header);
    Response r;
    r.status = h.status;
    r.payload.resize(h.payload_len);
    if (h.payload_len > 0 && !socket_.read_exact(r.payload)) fail(ErrorKind::network, "server closed mid-payload");
    r.frame_bytes = wire::kResponseHeaderBytes + h.payload_len;
    return r;
  }

  struct Fetched {
    Codestream stream;
    std::uint64_t bytes_transferred = 0;
  };

  /// `d` = -1 requests the full stream.
  Fetched fetch(const std::string& asset_id, int d) {
    if (d < -1 || d > 127) fail(ErrorKind::validation, "d must be in [-1, 127]");
    auto r = request({wire::Opcode::fetch, asset_id, static_cast<std::int8_t>(d)});
    check_ok(r, asset_id);
    return {parse(r.payload), r.frame_bytes};
  }

  /// Header and full segment index, without payload.
  Bytes head(const std::string& asset_id) {
    auto r = request({wire::Opcode::head, asset_id, 0});
    check_ok(r, asset_id);
    return std::move(r.payload);
  }

  std::vector<std::string> list() {
    auto r = request({wire::Opcode::list, {}, 0});
    check_ok(r, {});
    std::vector<std::string> ids;
    std::string current;
    for (auto c : r.payload) {
      if (c == '\n') {
        ids.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(static_cast<char>(c));
      }
    }
    return ids;
  }

 private:
  static void check_ok(const Response& r, const std::string& asset_id) {
    if (r.status == wire::Status::ok) return;
    const std::string detail(r.payload.begin(), r.payload.end());
    const auto kind = r.status == wire::Status::range ? ErrorKind::range : ErrorKind::network;
    throw Error(kind, std::string("server returned ") + wire::status_name(r.status) +
                          (asset_id.empty() ? "" : " for " + asset_id) + (detail.empty() ? "" : ": " + detail));
  }

  Socket socket_;
};

inline StreamClient::Fetched fetch(const std::string& address, const std::string& asset_id, int d) {
  StreamClient client(address);
  return client.fetch(asset_id, d);
}

// ---------------------------------------------------------------------------
// Benchmark

struct TransferMetrics {
  std::uint64_t bytes_transferred = 0;
  double decode_time_s = 0.0;  // summed over images, decode only
  std::size_t images_processed = 0;
  double wall_time_s = 0.0;
  double throughput = 0.0;  // images per wall-clock second
};

class BenchmarkError : public Error {
 public:
  BenchmarkError(const std::string& what, TransferMetrics partial)
      : Error(ErrorKind::network, what), partial_(partial) {}
  const TransferMetrics& partial() const { return partial_; }

 private:
  TransferMetrics partial_;
};

/// Fetch, decode and score every asset with `workers` concurrent pipelines,
/// each on its own connection.
inline TransferMetrics run_benchmark(const std::string& address, const std::vector<std::string>& assets, int d,
                                     const ScorerSpec& spec, int workers) {
  validate(spec);
  if (workers < 1) fail(ErrorKind::validation, "workers must be >= 1");
  struct Slot {
    bool done = false;
    std::uint64_t bytes = 0;
    double decode_s = 0.0;
  };
  std::vector<Slot> slots(assets.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::string first_error;

  const auto start = std::chrono::steady_clock::now();
  auto pipeline = [&] {
    try {
      StreamClient client(address);
      Scorer scorer(spec);
      while (!abort) {
        const auto i = next.fetch_add(1);
        if (i >= assets.size()) break;
        auto fetched = client.fetch(assets[i], d);
        const auto t0 = std::chrono::steady_clock::now();
        const int decoded_d = fetched.stream.max_available_d();
        const auto img = decode_partial(fetched.stream, decoded_d);
        const auto t1 = std::chrono::steady_clock::now();
        (void)scorer(img, assets[i], decoded_d);
        slots[i] = {true, fetched.bytes_transferred, std::chrono::duration<double>(t1 - t0).count()};
      }
    } catch (const std::exception& e) {
      abort = true;
      std::lock_guard lock(error_mutex);
      if (first_error.empty()) first_error = e.what();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(pipeline);
  for (auto& t : pool) t.join();
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  TransferMetrics m;
  for (const auto& s : slots) {
    if (!s.done) continue;
    m.bytes_transferred += s.bytes;
    m.decode_time_s += s.decode_s;
    ++m.images_processed;
  }
  m.wall_time_s = elapsed;
  m.throughput = elapsed > 0 ? static_cast<double>(m.images_processed) / elapsed : 0.0;
  if (!first_error.empty()) throw BenchmarkError("benchmark aborted: " + first_error, m);
  return m;
}

}  // namespace isle
