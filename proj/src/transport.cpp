#include "ppmcsa/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <numeric>
#include <thread>

namespace ppmcsa::protocol {

const char* to_string(FrameType type) {
  switch (type) {
    case FrameType::Handshake: return "HANDSHAKE";
    case FrameType::EncShares: return "ENC_SHARES";
    case FrameType::Grouping: return "GROUPING";
    case FrameType::GarbledGates: return "GARBLED_GATES";
    case FrameType::OtMsg: return "OT_MSG";
    case FrameType::InputLabels: return "INPUT_LABELS";
    case FrameType::Decoder: return "DECODER";
    case FrameType::Result: return "RESULT";
  }
  return "UNKNOWN";
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxFramePayload) throw TransportError("frame payload too large");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderBytes + frame.payload.size());
  out.push_back(static_cast<std::uint8_t>(frame.type));
  const auto len = static_cast<std::uint32_t>(frame.payload.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

// --- loopback ------------------------------------------------------------------

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::uint8_t> data;
  bool closed = false;
};

class LoopbackChannel final : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in) : out_(std::move(out)), in_(std::move(in)) {}
  ~LoopbackChannel() override { close(); }

  void send_bytes(std::span<const std::uint8_t> bytes) override {
    std::lock_guard lock(out_->mu);
    if (out_->closed) throw TransportError("loopback channel closed");
    out_->data.insert(out_->data.end(), bytes.begin(), bytes.end());
    out_->cv.notify_all();
  }

  void recv_bytes(std::span<std::uint8_t> out) override {
    std::unique_lock lock(in_->mu);
    in_->cv.wait(lock, [&] { return in_->data.size() >= out.size() || in_->closed; });
    if (in_->data.size() < out.size()) throw TransportError("peer disconnected");
    std::copy_n(in_->data.begin(), out.size(), out.begin());
    in_->data.erase(in_->data.begin(), in_->data.begin() + static_cast<std::ptrdiff_t>(out.size()));
  }

  void close() override {
    for (auto* p : {out_.get(), in_.get()}) {
      std::lock_guard lock(p->mu);
      p->closed = true;
      p->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Pipe> out_;
  std::shared_ptr<Pipe> in_;
};

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpChannel() override { close(); }

  void send_bytes(std::span<const std::uint8_t> bytes) override {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw TransportError(std::string("send failed: ") + std::strerror(errno));
      done += static_cast<std::size_t>(n);
    }
  }

  void recv_bytes(std::span<std::uint8_t> out) override {
    std::size_t done = 0;
    while (done < out.size()) {
      const ssize_t n = ::recv(fd_, out.data() + done, out.size() - done, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n == 0) throw TransportError("peer disconnected");
      if (n < 0) throw TransportError(std::string("recv failed: ") + std::strerror(errno));
      done += static_cast<std::size_t>(n);
    }
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback_pair() {
  auto a_to_b = std::make_shared<Pipe>();
  auto b_to_a = std::make_shared<Pipe>();
  return {std::make_unique<LoopbackChannel>(a_to_b, b_to_a), std::make_unique<LoopbackChannel>(b_to_a, a_to_b)};
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_address) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1)
    throw TransportError("bad bind address " + bind_address);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 4) != 0) {
    ::close(fd_);
    throw TransportError("cannot listen on port " + std::to_string(port) + ": " + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::accept() {
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw TransportError(std::string("accept failed: ") + std::strerror(errno));
  return std::make_unique<TcpChannel>(fd);
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port, int retries) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve " + host);
  for (int attempt = 0;; ++attempt) {
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpChannel>(fd);
    }
    if (fd >= 0) ::close(fd);
    if (attempt >= retries) {
      ::freeaddrinfo(res);
      throw TransportError("cannot connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

// --- framing ----------------------------------------------------------------------

std::uint64_t TrafficStats::total_sent() const {
  return std::accumulate(bytes_sent.begin(), bytes_sent.end(), std::uint64_t{0});
}

std::uint64_t TrafficStats::total_received() const {
  return std::accumulate(bytes_received.begin(), bytes_received.end(), std::uint64_t{0});
}

void FramedLink::send(const Frame& frame) {
  const auto bytes = encode_frame(frame);
  channel_.send_bytes(bytes);
  const auto t = static_cast<std::size_t>(frame.type);
  stats_.bytes_sent[t] += bytes.size();
  ++stats_.frames_sent[t];
}

Frame FramedLink::recv() {
  std::array<std::uint8_t, kFrameHeaderBytes> header{};
  channel_.recv_bytes(header);
  const std::uint8_t tag = header[0];
  if (tag == 0 || tag >= kFrameTypes) throw TransportError("unknown frame tag " + std::to_string(tag));
  std::uint32_t len = 0;
  for (int i = 1; i < 5; ++i) len = (len << 8) | header[i];
  if (len > kMaxFramePayload) throw TransportError("frame length exceeds limit");
  Frame f{static_cast<FrameType>(tag), std::vector<std::uint8_t>(len)};
  channel_.recv_bytes(f.payload);
  stats_.bytes_received[tag] += kFrameHeaderBytes + len;
  ++stats_.frames_received[tag];
  received_types_.push_back(f.type);
  return f;
}

std::vector<std::uint8_t> FramedLink::expect(FrameType type) {
  Frame f = recv();
  if (f.type != type)
    throw TransportError(std::string("expected ") + to_string(type) + " frame, got " + to_string(f.type));
  return std::move(f.payload);
}

Writer& Writer::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Writer& Writer::u64(std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Writer& Writer::f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }

Writer& Writer::bytes(std::span<const std::uint8_t> b) {
  out_.insert(out_.end(), b.begin(), b.end());
  return *this;
}

Writer& Writer::blob(std::span<const std::uint8_t> b) {
  u32(static_cast<std::uint32_t>(b.size()));
  return bytes(b);
}

std::span<const std::uint8_t> Reader::bytes(std::size_t n) {
  if (at_ + n > in_.size()) throw TransportError("truncated payload");
  auto s = in_.subspan(at_, n);
  at_ += n;
  return s;
}

std::uint8_t Reader::u8() { return bytes(1)[0]; }

std::uint32_t Reader::u32() {
  std::uint32_t v = 0;
  for (std::uint8_t b : bytes(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t Reader::u64() {
  std::uint64_t v = 0;
  for (std::uint8_t b : bytes(8)) v = (v << 8) | b;
  return v;
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

std::vector<std::uint8_t> Reader::blob() {
  const std::uint32_t n = u32();
  const auto s = bytes(n);
  return {s.begin(), s.end()};
}

void Reader::expect_done() const {
  if (!done()) throw TransportError("trailing bytes in payload");
}

}  // namespace ppmcsa::protocol
