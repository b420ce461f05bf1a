#include "cts/bridge.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace cts {

using nlohmann::json;

std::optional<std::string> StdioTransport::read_line() {
  std::string line;
  if (!std::getline(std::cin, line)) return std::nullopt;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void StdioTransport::write_line(const std::string& line) {
  std::cout << line << '\n' << std::flush;
}

TcpTransport::TcpTransport(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("TcpTransport: socket() failed");
  const int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("TcpTransport: cannot bind 127.0.0.1:" +
                             std::to_string(port));
  }
  if (::listen(listen_fd_, 1) < 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("TcpTransport: listen() failed");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpTransport::~TcpTransport() {
  if (client_fd_ >= 0) ::close(client_fd_);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpTransport::ensure_client() {
  if (client_fd_ >= 0 || eof_) return;
  client_fd_ = ::accept(listen_fd_, nullptr, nullptr);
  if (client_fd_ < 0) eof_ = true;
}

std::optional<std::string> TcpTransport::read_line() {
  ensure_client();
  if (client_fd_ < 0) return std::nullopt;
  for (;;) {
    if (const auto pos = buf_.find('\n'); pos != std::string::npos) {
      std::string line = buf_.substr(0, pos);
      buf_.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (eof_) {
      if (buf_.empty()) return std::nullopt;
      std::string line = std::move(buf_);
      buf_.clear();
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::recv(client_fd_, chunk, sizeof chunk, 0);
    if (n <= 0) {
      eof_ = true;
      continue;
    }
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

void TcpTransport::write_line(const std::string& line) {
  ensure_client();
  if (client_fd_ < 0) return;
  std::string out = line;
  out += '\n';
  const char* p = out.data();
  std::size_t left = out.size();
  while (left > 0) {
    const ssize_t n = ::send(client_fd_, p, left, MSG_NOSIGNAL);
    if (n <= 0) {
      eof_ = true;
      return;
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

void serve(Teacher& teacher, Transport& transport) {
  const ParameterSpace& space = teacher.space();
  std::uint64_t next_id = 0;
  std::optional<std::pair<std::uint64_t, Vec>> outstanding;

  const auto send = [&](const json& j) { transport.write_line(j.dump()); };
  const auto send_error = [&](const std::string& message) {
    send(json{{"type", "error"}, {"message", message}});
  };

  while (auto line = transport.read_line()) {
    json msg = json::parse(*line, nullptr, /*allow_exceptions=*/false);
    if (msg.is_discarded() || !msg.is_object()) {
      send_error("malformed message: expected one JSON object per line");
      continue;
    }
    const auto type_it = msg.find("type");
    if (type_it == msg.end() || !type_it->is_string()) {
      send_error("malformed message: missing string field 'type'");
      continue;
    }
    const auto type = type_it->get<std::string>();

    if (type == "hello") {
      send(json{{"type", "hello"},
                {"protocol_version", 1},
                {"dims", space.dims()},
                {"lower", space.lower},
                {"upper", space.upper}});
    } else if (type == "param_request") {
      if (outstanding) {
        send_error("proposal " + std::to_string(outstanding->first) +
                   " still awaits its result");
        continue;
      }
      Vec p = teacher.propose();
      send(json{{"type", "param"}, {"id", next_id}, {"values", p}});
      outstanding.emplace(next_id, std::move(p));
      ++next_id;
    } else if (type == "result") {
      const auto id_it = msg.find("id");
      const auto reward_it = msg.find("reward");
      if (id_it == msg.end() || !id_it->is_number_unsigned() ||
          reward_it == msg.end() || !reward_it->is_number()) {
        send_error("malformed result: needs a non-negative integer 'id' and a number 'reward'");
        continue;
      }
      const auto id = id_it->get<std::uint64_t>();
      const double reward = reward_it->get<double>();
      if (!std::isfinite(reward)) {
        send_error("malformed result: reward must be finite");
        continue;
      }
      if (!outstanding) {
        send_error("no outstanding proposal");
        continue;
      }
      if (id != outstanding->first) {
        send_error("unknown or already answered id " + std::to_string(id));
        continue;
      }
      teacher.observe(outstanding->second, reward);
      outstanding.reset();
      send(json{{"type", "ack"}, {"id", id}});
    } else {
      send_error("unsupported message type '" + type + "'");
    }
  }
}

}  // namespace cts
