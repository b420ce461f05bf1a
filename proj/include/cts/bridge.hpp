#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cts/core.hpp"

namespace cts {

// One text line in, one out. read_line blocks and returns nothing once the
// peer is done. Lines carry no trailing newline.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::optional<std::string> read_line() = 0;
  virtual void write_line(const std::string& line) = 0;
};

class StdioTransport : public Transport {
 public:
  std::optional<std::string> read_line() override;
  void write_line(const std::string& line) override;
};

// Listens on 127.0.0.1 and talks to a single client. Pass port 0 to let the
// system pick one; port() reports the bound port either way.
class TcpTransport : public Transport {
 public:
  explicit TcpTransport(std::uint16_t port);
  ~TcpTransport() override;

  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;

  std::uint16_t port() const { return port_; }
  std::optional<std::string> read_line() override;
  void write_line(const std::string& line) override;

 private:
  void ensure_client();

  int listen_fd_ = -1;
  int client_fd_ = -1;
  std::uint16_t port_ = 0;
  std::string buf_;
  bool eof_ = false;
};

// Answers the line protocol over the given transport until the peer
// disconnects. Messages are JSON objects, one per line; malformed input
// earns an error reply and leaves the conversation state untouched.
void serve(Teacher& teacher, Transport& transport);

}  // namespace cts
