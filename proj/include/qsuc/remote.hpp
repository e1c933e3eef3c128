#ifndef QSUC_REMOTE_HPP
#define QSUC_REMOTE_HPP

// Minimal JSON-over-HTTP annealer protocol.
//
//   POST {n, linear[], quadratic[[i,j,v]...], offset, reads}
//   ->   {solutions: [{bits: "0101...", energy}], backend}
//
// The client never trusts the reported energy: every returned bitstring is
// re-scored locally and a mismatch is an error.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <thread>

#include <json.hpp>

#include "qsuc/errors.hpp"
#include "qsuc/io.hpp"
#include "qsuc/qubo.hpp"
#include "qsuc/samplers.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro that
// collides with Eigen parameter names.
#include <httplib.h>

namespace qsuc {

struct Endpoint {
  std::string scheme = "http";
  std::string host;
  int port = 80;
  std::string path = "/";
};

inline Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw InvalidArgument("endpoint must look like http://host[:port][/path]: " + url);
  Endpoint e;
  e.scheme = m[1];
  e.host = m[2];
  e.port = m[3].matched ? std::stoi(m[3]) : (e.scheme == "https" ? 443 : 80);
  e.path = m[4].matched ? std::string(m[4]) : "/";
  if (e.scheme == "https") throw InvalidArgument("https endpoints are not supported by this build");
  return e;
}

inline constexpr double kEnergyTolerance = 1e-6;

struct RemoteOptions {
  std::string endpoint;
  std::string token;  // sent as a Bearer token when non-empty
  std::size_t reads = 1;
  double timeout_s = 30.0;
};

inline json request_body(const Qubo& q, std::size_t reads) {
  json body = to_json(q);
  body["reads"] = reads;
  return body;
}

/// Lowest-energy read from the remote service, re-verified locally.
inline SampleResult submit_remote(const Qubo& q, const RemoteOptions& opt) {
  const Endpoint ep = parse_endpoint(opt.endpoint);
  const auto t0 = std::chrono::steady_clock::now();

  httplib::Client cli(ep.host, ep.port);
  const auto secs = static_cast<time_t>(opt.timeout_s);
  const auto usecs = static_cast<time_t>((opt.timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!opt.token.empty()) headers.emplace("Authorization", "Bearer " + opt.token);

  auto res = cli.Post(ep.path, headers, request_body(q, opt.reads).dump(), "application/json");
  if (!res) throw TransportError("request to " + opt.endpoint + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("annealer service answered HTTP " + std::to_string(res->status) + ": " + res->body);

  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains("solutions") || !reply.at("solutions").is_array() ||
      reply.at("solutions").empty())
    throw ProtocolError("response lacks a non-empty 'solutions' array");

  SampleResult best;
  bool have = false;
  for (const auto& s : reply.at("solutions")) {
    if (!s.is_object() || !s.contains("bits") || !s.at("bits").is_string() || !s.contains("energy") ||
        !s.at("energy").is_number())
      throw ProtocolError("each solution needs a 'bits' string and a numeric 'energy'");
    Bits bits;
    try {
      bits = parse_bits(s.at("bits").get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ProtocolError(e.what());
    }
    if (bits.size() != q.size())
      throw ProtocolError("solution has " + std::to_string(bits.size()) + " bits, expected " + std::to_string(q.size()));
    const double reported = s.at("energy").get<double>();
    const double local = qubo_value(q, bits);
    if (!(std::abs(reported - local) <= kEnergyTolerance * (1.0 + std::abs(local))))
      throw VerificationError("reported energy " + std::to_string(reported) + " differs from local value " +
                              std::to_string(local) + " for " + to_string(bits));
    if (!have || local < best.energy || (local == best.energy && lex_less(bits, best.bits))) {
      best.bits = std::move(bits);
      best.energy = local;
      have = true;
    }
  }
  best.reads = reply.at("solutions").size();
  best.backend = reply.value("backend", std::string("remote"));
  best.wall_time = detail::seconds_since(t0);
  return best;
}

/// Token from the explicit setting, else from the named environment variable.
inline std::string resolve_token(const std::string& token, const std::string& env_name) {
  if (!token.empty()) return token;
  if (env_name.empty()) return {};
  const char* v = std::getenv(env_name.c_str());
  return v ? std::string(v) : std::string();
}

class RemoteSampler final : public Sampler {
 public:
  explicit RemoteSampler(RemoteOptions opt) : opt_(std::move(opt)) { parse_endpoint(opt_.endpoint); }
  SampleResult sample(const Qubo& q) override { return submit_remote(q, opt_); }
  std::string name() const override { return "remote"; }

 private:
  RemoteOptions opt_;
};

// ---- mock service ---------------------------------------------------------

struct MockOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::string path = "/sample";
  std::string token;               // required Bearer token when non-empty
  std::optional<std::string> fixed_bits;  // answer with this bitstring regardless of input
  double energy_bias = 0.0;        // added to the reported energy (to exercise verification)
  SaSchedule schedule;             // used above the exhaustive size limit
};

/// Answers a single request body; exposed for tests without sockets.
inline json mock_answer(const json& body, const MockOptions& opt) {
  const Qubo q = qubo_from_json(body);
  const auto reads = body.value("reads", std::size_t{1});
  Bits bits;
  if (opt.fixed_bits) {
    bits = parse_bits(*opt.fixed_bits);
  } else if (q.size() <= kMaxExhaustiveVars) {
    bits = solve_exhaustive(q).bits;
  } else {
    bits = solve_sa(q, opt.schedule).bits;
  }
  const double e = bits.size() == q.size() ? qubo_value(q, bits) : 0.0;
  json sols = json::array();
  for (std::size_t r = 0; r < std::max<std::size_t>(reads, 1); ++r)
    sols.push_back({{"bits", to_string(bits)}, {"energy", e + opt.energy_bias}});
  return {{"solutions", sols}, {"backend", "mock-annealer"}};
}

class MockAnnealer {
 public:
  explicit MockAnnealer(MockOptions opt) : opt_(std::move(opt)) {
    server_.Post(opt_.path, [this](const httplib::Request& req, httplib::Response& res) {
      if (!opt_.token.empty() && req.get_header_value("Authorization") != "Bearer " + opt_.token) {
        res.status = 401;
        res.set_content(R"({"error":"unauthorized"})", "application/json");
        return;
      }
      try {
        res.set_content(mock_answer(json::parse(req.body), opt_).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  }
  ~MockAnnealer() { stop(); }
  MockAnnealer(const MockAnnealer&) = delete;
  MockAnnealer& operator=(const MockAnnealer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start() {
    port_ = opt_.port == 0 ? server_.bind_to_any_port(opt_.host) : (server_.bind_to_port(opt_.host, opt_.port)
                                                                         ? opt_.port
                                                                         : -1);
    if (port_ < 0) throw TransportError("cannot bind " + opt_.host + ":" + std::to_string(opt_.port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Serves on the calling thread until stop() is called from elsewhere.
  void run() {
    if (opt_.port == 0) throw InvalidArgument("a foreground mock server needs an explicit port");
    if (!server_.listen(opt_.host, opt_.port)) throw TransportError("cannot listen on " + url());
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_ < 0 ? opt_.port : port_; }
  std::string url() const { return "http://" + opt_.host + ":" + std::to_string(port()) + opt_.path; }

 private:
  MockOptions opt_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace qsuc

#endif  // QSUC_REMOTE_HPP
