#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <deque>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cts/bridge.hpp"
#include "cts/teachers.hpp"
#include "cts/toyenv.hpp"

using namespace cts;
using nlohmann::json;

namespace {

// Feeds a fixed script of lines and records every reply.
class ScriptTransport : public Transport {
 public:
  explicit ScriptTransport(std::vector<std::string> lines)
      : pending_(lines.begin(), lines.end()) {}

  std::optional<std::string> read_line() override {
    if (pending_.empty()) return std::nullopt;
    std::string line = pending_.front();
    pending_.pop_front();
    return line;
  }
  void write_line(const std::string& line) override { replies.push_back(line); }

  std::vector<std::string> replies;

 private:
  std::deque<std::string> pending_;
};

std::vector<json> serve_script(Teacher& teacher,
                               const std::vector<std::string>& lines) {
  ScriptTransport transport(lines);
  serve(teacher, transport);
  std::vector<json> parsed;
  for (const auto& reply : transport.replies) {
    parsed.push_back(json::parse(reply));
  }
  return parsed;
}

}  // namespace

TEST_CASE("hello reports the space") {
  ParameterSpace space({-1.0, 0.0}, {2.0, 6.5});
  RandomTeacher teacher(space, 3);
  auto replies = serve_script(teacher, {R"({"type":"hello"})"});
  REQUIRE(replies.size() == 1);
  CHECK(replies[0]["type"] == "hello");
  CHECK(replies[0]["protocol_version"] == 1);
  CHECK(replies[0]["dims"] == 2);
  CHECK(replies[0]["lower"][0] == -1.0);
  CHECK(replies[0]["lower"][1] == 0.0);
  CHECK(replies[0]["upper"][0] == 2.0);
  CHECK(replies[0]["upper"][1] == 6.5);
}

TEST_CASE("param and result alternate with increasing ids") {
  auto space = ParameterSpace::unit(2);
  RandomTeacher teacher(space, 3);
  auto replies = serve_script(
      teacher, {R"({"type":"hello"})", R"({"type":"param_request"})",
                R"({"type":"result","id":0,"reward":42.0})",
                R"({"type":"param_request"})",
                R"({"type":"result","id":1,"reward":7.5})"});
  REQUIRE(replies.size() == 5);
  CHECK(replies[1]["type"] == "param");
  CHECK(replies[1]["id"] == 0);
  REQUIRE(replies[1]["values"].size() == 2);
  for (double v : replies[1]["values"]) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(replies[2]["type"] == "ack");
  CHECK(replies[2]["id"] == 0);
  CHECK(replies[3]["type"] == "param");
  CHECK(replies[3]["id"] == 1);
  CHECK(replies[4]["type"] == "ack");
  CHECK(replies[4]["id"] == 1);

  // Both observations reached the teacher.
  REQUIRE(teacher.history().size() == 2);
  CHECK(teacher.history().reward(0) == 42.0);
  CHECK(teacher.history().reward(1) == 7.5);
  // The stored proposal is what lands in history.
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(teacher.history().param(0)[d] ==
          replies[1]["values"][d].get<double>());
  }
}

TEST_CASE("protocol violations earn error replies and change nothing") {
  auto space = ParameterSpace::unit(2);

  SUBCASE("second param_request without a result") {
    RandomTeacher teacher(space, 3);
    auto replies = serve_script(teacher, {R"({"type":"param_request"})",
                                          R"({"type":"param_request"})",
                                          R"({"type":"result","id":0,"reward":1})"});
    REQUIRE(replies.size() == 3);
    CHECK(replies[0]["type"] == "param");
    CHECK(replies[1]["type"] == "error");
    CHECK(replies[2]["type"] == "ack");  // conversation survived
    CHECK(teacher.history().size() == 1);
  }

  SUBCASE("result before any param") {
    RandomTeacher teacher(space, 3);
    auto replies =
        serve_script(teacher, {R"({"type":"result","id":0,"reward":1.0})"});
    REQUIRE(replies.size() == 1);
    CHECK(replies[0]["type"] == "error");
    CHECK(teacher.history().size() == 0);
  }

  SUBCASE("result with the wrong id") {
    RandomTeacher teacher(space, 3);
    auto replies = serve_script(
        teacher,
        {R"({"type":"param_request"})", R"({"type":"result","id":7,"reward":1})",
         R"({"type":"result","id":0,"reward":1})"});
    REQUIRE(replies.size() == 3);
    CHECK(replies[1]["type"] == "error");
    CHECK(replies[2]["type"] == "ack");
    CHECK(teacher.history().size() == 1);
  }

  SUBCASE("bad id or reward payloads are rejected") {
    RandomTeacher teacher(space, 3);
    auto replies = serve_script(
        teacher,
        {R"({"type":"param_request"})",
         R"({"type":"result","id":-1,"reward":1})",
         R"({"type":"result","id":0.5,"reward":1})",
         R"({"type":"result","id":0,"reward":"big"})",
         R"({"type":"result","id":0,"reward":null})",
         R"({"type":"result","id":0})", R"({"type":"result","reward":1})",
         R"({"type":"result","id":0,"reward":1e999})",
         R"({"type":"result","id":0,"reward":1})"});
    REQUIRE(replies.size() == 9);
    for (std::size_t i = 1; i + 1 < replies.size(); ++i) {
      CAPTURE(i);
      CHECK(replies[i]["type"] == "error");
    }
    CHECK(replies.back()["type"] == "ack");
    CHECK(teacher.history().size() == 1);
  }

  SUBCASE("unknown types and non-objects are rejected") {
    RandomTeacher teacher(space, 3);
    auto replies = serve_script(
        teacher, {R"({"type":"bogus"})", R"([1,2,3])", R"("hi")",
                  R"({"no_type":1})", R"({"type":"hello"})"});
    REQUIRE(replies.size() == 5);
    for (int i = 0; i < 4; ++i) CHECK(replies[i]["type"] == "error");
    CHECK(replies[4]["type"] == "hello");
  }

  SUBCASE("fuzzing with garbage never kills the conversation") {
    RandomTeacher teacher(space, 99);
    Rng fuzz(123);
    std::vector<std::string> lines;
    for (int i = 0; i < 300; ++i) {
      std::string junk;
      const std::size_t len = fuzz.uniform_index(40);
      for (std::size_t j = 0; j < len; ++j) {
        junk.push_back(static_cast<char>(1 + fuzz.uniform_index(255)));
      }
      if (junk.find('\n') != std::string::npos) continue;
      lines.push_back(junk);
    }
    const std::size_t n_junk = lines.size();
    lines.push_back(R"({"type":"param_request"})");
    lines.push_back(R"({"type":"result","id":0,"reward":3.0})");
    auto replies = serve_script(teacher, lines);
    REQUIRE(replies.size() == n_junk + 2);
    for (std::size_t i = 0; i < n_junk; ++i) {
      CHECK(replies[i]["type"] == "error");
    }
    CHECK(replies[n_junk]["type"] == "param");
    CHECK(replies[n_junk + 1]["type"] == "ack");
    CHECK(teacher.history().size() == 1);
  }

  SUBCASE("truncated json is an error, not a crash") {
    RandomTeacher teacher(space, 3);
    auto replies = serve_script(
        teacher, {R"({"type":"param_req)", R"({)", "", R"({"type":"hello"})"});
    // An empty line is also malformed input.
    REQUIRE(replies.size() == 4);
    CHECK(replies[0]["type"] == "error");
    CHECK(replies[1]["type"] == "error");
    CHECK(replies[2]["type"] == "error");
    CHECK(replies[3]["type"] == "hello");
  }
}

TEST_CASE("a bridged run matches the in-process run exactly") {
  ToySpaceConfig env_cfg;
  env_cfg.relevant_dims = 2;
  env_cfg.cubes_per_dim = 10;
  TeacherParams params;
  const std::uint64_t seed = 31;
  const int episodes = 2000;

  // In-process reference.
  ToySpace env_direct(env_cfg);
  auto direct = make_teacher(TeacherKind::Riac, env_direct.space(), params, seed);
  std::vector<Vec> direct_params;
  for (int i = 0; i < episodes; ++i) {
    Vec p = direct->propose();
    direct->observe(p, env_direct.episode(p));
    direct_params.push_back(std::move(p));
  }

  // The same student driven through the wire protocol.
  ToySpace env_bridged(env_cfg);
  auto served = make_teacher(TeacherKind::Riac, env_bridged.space(), params, seed);

  class LoopTransport : public Transport {
   public:
    LoopTransport(ToySpace& env, int episodes) : env_(env), left_(episodes) {}

    std::optional<std::string> read_line() override {
      if (awaiting_id_ >= 0) {
        json msg{{"type", "result"},
                 {"id", awaiting_id_},
                 {"reward", pending_reward_}};
        awaiting_id_ = -1;
        return msg.dump();
      }
      if (left_ == 0) return std::nullopt;
      --left_;
      return std::string(R"({"type":"param_request"})");
    }

    void write_line(const std::string& line) override {
      json msg = json::parse(line);
      if (msg["type"] == "param") {
        Vec p = msg["values"].get<Vec>();
        pending_reward_ = env_.episode(p);
        awaiting_id_ = msg["id"].get<long long>();
        params.push_back(std::move(p));
      }
    }

    std::vector<Vec> params;

   private:
    ToySpace& env_;
    int left_;
    long long awaiting_id_ = -1;
    double pending_reward_ = 0.0;
  };

  LoopTransport loop(env_bridged, episodes);
  serve(*served, loop);

  REQUIRE(loop.params.size() == direct_params.size());
  CHECK(loop.params == direct_params);  // bit-identical proposals
  CHECK(env_bridged.unlocked_count() == env_direct.unlocked_count());
  CHECK(served->history().size() == direct->history().size());
}

TEST_CASE("tcp transport serves one client over loopback") {
  auto space = ParameterSpace::unit(3);
  RandomTeacher teacher(space, 5);
  TcpTransport transport(0);  // ephemeral port
  REQUIRE(transport.port() != 0);

  std::thread server([&] { serve(teacher, transport); });

  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(transport.port());
  REQUIRE(::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr) == 1);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);

  auto send_line = [&](const std::string& s) {
    std::string line = s + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
      auto n = ::send(fd, line.data() + off, line.size() - off, 0);
      REQUIRE(n > 0);
      off += static_cast<std::size_t>(n);
    }
  };
  std::string buf;
  auto recv_line = [&]() -> std::string {
    for (;;) {
      auto pos = buf.find('\n');
      if (pos != std::string::npos) {
        std::string line = buf.substr(0, pos);
        buf.erase(0, pos + 1);
        return line;
      }
      char chunk[256];
      auto n = ::recv(fd, chunk, sizeof(chunk), 0);
      REQUIRE(n > 0);
      buf.append(chunk, static_cast<std::size_t>(n));
    }
  };

  send_line(R"({"type":"hello"})");
  auto hello = json::parse(recv_line());
  CHECK(hello["type"] == "hello");
  CHECK(hello["dims"] == 3);

  for (int i = 0; i < 5; ++i) {
    send_line(R"({"type":"param_request"})");
    auto param = json::parse(recv_line());
    REQUIRE(param["type"] == "param");
    CHECK(param["id"] == i);
    json result{{"type", "result"}, {"id", i}, {"reward", 1.5 * i}};
    send_line(result.dump());
    auto ack = json::parse(recv_line());
    CHECK(ack["type"] == "ack");
    CHECK(ack["id"] == i);
  }

  ::close(fd);
  server.join();
  CHECK(teacher.history().size() == 5);
  CHECK(teacher.history().reward(4) == 6.0);
}
