#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "softgate/calibration.hpp"
#include "softgate/gate.hpp"

namespace softgate {

inline constexpr int kWireSchemaVersion = 1;

struct HttpReply {
  int status = 200;
  std::string body;      // JSON document
  std::string decision;  // short summary for the request log
};

// Request handling independent of the transport. Holds the calibration
// immutably; every handler is const and safe to call concurrently.
//
//   POST /v1/gate        {"probs": [...], "mode": "per-class" | {"type": "global", "threshold": t}}
//   POST /v1/gate/batch  [request, ...] -> [response, ...]
//   GET  /v1/calibration metadata, support, thresholds
//   GET  /healthz
//
// Malformed JSON or missing fields give 400, probability or dimension
// violations 422, anything else 500.
class GateService {
 public:
  explicit GateService(CalibrationArtifact artifact, GateOptions options = {});

  HttpReply gate(const std::string& body) const;
  HttpReply gate_batch(const std::string& body) const;
  HttpReply calibration() const;
  HttpReply health() const;

  const CalibrationArtifact& artifact() const noexcept { return artifact_; }
  const std::string& digest() const noexcept { return digest_; }

 private:
  CalibrationArtifact artifact_;
  GateOptions options_;
  std::string digest_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::ostream* log = nullptr;  // one line per request when set
};

// HTTP/1.1 front end over GateService.
class GateServer {
 public:
  GateServer(const GateService& service, ServerOptions options);
  ~GateServer();
  GateServer(const GateServer&) = delete;
  GateServer& operator=(const GateServer&) = delete;

  // Binds the socket and returns the bound port. Throws Error on failure.
  int bind();
  // Serves until stop() is called. Requires a prior bind().
  void listen();
  // Stops accepting connections; in-flight requests complete first.
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace softgate
