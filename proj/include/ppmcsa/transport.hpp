#pragma once

// Framed byte-stream transport: 1-byte tag, 4-byte big-endian length, payload.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppmcsa::protocol {

enum class FrameType : std::uint8_t {
  Handshake = 1,
  EncShares = 2,
  Grouping = 3,
  GarbledGates = 4,
  OtMsg = 5,
  InputLabels = 6,
  Decoder = 7,
  Result = 8,
};

inline constexpr std::size_t kFrameTypes = 9;  // indexable by tag
inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::uint32_t kMaxFramePayload = 1u << 30;

const char* to_string(FrameType type);

struct Frame {
  FrameType type = FrameType::Handshake;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reliable ordered byte stream.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send_bytes(std::span<const std::uint8_t> bytes) = 0;
  // Blocks until out is filled; throws TransportError if the peer went away.
  virtual void recv_bytes(std::span<std::uint8_t> out) = 0;
  virtual void close() = 0;
};

// Two connected in-process endpoints.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback_pair();

// Blocking TCP endpoints.
class TcpListener {
 public:
  explicit TcpListener(std::uint16_t port, const std::string& bind_address = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Channel> accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Channel> tcp_connect(const std::string& host, std::uint16_t port, int retries = 50);

struct TrafficStats {
  std::array<std::uint64_t, kFrameTypes> bytes_sent{};
  std::array<std::uint64_t, kFrameTypes> bytes_received{};
  std::array<std::uint64_t, kFrameTypes> frames_sent{};
  std::array<std::uint64_t, kFrameTypes> frames_received{};

  std::uint64_t total_sent() const;
  std::uint64_t total_received() const;
};

// Frame-level wrapper counting bytes per frame type (header included).
class FramedLink {
 public:
  explicit FramedLink(Channel& channel) : channel_(channel) {}

  void send(const Frame& frame);
  void send(FrameType type, std::vector<std::uint8_t> payload) { send(Frame{type, std::move(payload)}); }
  Frame recv();
  // Throws TransportError when the next frame has a different tag.
  std::vector<std::uint8_t> expect(FrameType type);

  const TrafficStats& stats() const { return stats_; }
  std::vector<FrameType> received_types() const { return received_types_; }
  void close() { channel_.close(); }

 private:
  Channel& channel_;
  TrafficStats stats_;
  std::vector<FrameType> received_types_;
};

// Little helpers for payload encoding (big-endian integers).
class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& f64(double v);
  Writer& bytes(std::span<const std::uint8_t> b);
  // u32 length prefix then bytes.
  Writer& blob(std::span<const std::uint8_t> b);
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::span<const std::uint8_t> bytes(std::size_t n);
  std::vector<std::uint8_t> blob();
  bool done() const { return at_ == in_.size(); }
  void expect_done() const;

 private:
  std::span<const std::uint8_t> in_;
  std::size_t at_ = 0;
};

}  // namespace ppmcsa::protocol
