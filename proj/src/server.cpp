#include "softgate/server.hpp"

#include <chrono>
#include <mutex>
#include <ostream>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "softgate/error.hpp"

namespace softgate {

namespace {

using nlohmann::json;

struct RequestError {
  int status;
  std::string message;
};

struct ParsedRequest {
  std::vector<double> probs;
  GateMode mode;
};

json error_body(const std::string& message, std::optional<std::size_t> index = std::nullopt) {
  json j = {{"schema_version", kWireSchemaVersion}, {"error", message}};
  if (index) j["index"] = *index;
  return j;
}

ParsedRequest parse_request(const json& req) {
  if (!req.is_object()) throw RequestError{400, "request must be a JSON object"};
  if (req.contains("schema_version")) {
    const auto& v = req.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kWireSchemaVersion)
      throw RequestError{400, "unsupported schema_version"};
  }
  if (!req.contains("probs") || !req.at("probs").is_array())
    throw RequestError{400, "field 'probs' must be an array of numbers"};

  ParsedRequest out;
  for (const auto& p : req.at("probs")) {
    if (!p.is_number()) throw RequestError{400, "field 'probs' must be an array of numbers"};
    out.probs.push_back(p.get<double>());
  }

  if (req.contains("mode")) {
    const auto& m = req.at("mode");
    std::string type;
    if (m.is_string()) {
      type = m.get<std::string>();
    } else if (m.is_object() && m.contains("type") && m.at("type").is_string()) {
      type = m.at("type").get<std::string>();
    } else {
      throw RequestError{400, "field 'mode' must be \"per-class\" or {\"type\": \"global\", \"threshold\": t}"};
    }
    if (type == "global") {
      if (!m.is_object() || !m.contains("threshold") || !m.at("threshold").is_number())
        throw RequestError{400, "global mode needs a numeric 'threshold'"};
      out.mode = GateMode::global(m.at("threshold").get<double>());
    } else if (type != "per-class") {
      throw RequestError{400, "unknown mode '" + type + "'"};
    }
  }
  return out;
}

json decision_body(const GateDecision& d, const std::string& digest) {
  const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"schema_version", kWireSchemaVersion},
              {"status", to_string(d.status)},
              {"predicted_class", d.predicted_class},
              {"distance", num(d.distance_to_predicted_centroid)},
              {"threshold", num(d.threshold_applied)},
              {"nearest_centroid", d.nearest_centroid},
              {"nearest_distance", d.nearest_distance},
              {"mode", d.global_mode ? "global" : "per-class"},
              {"calibration_digest", digest}};
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw RequestError{400, std::string("malformed JSON: ") + e.what()};
  }
}

}  // namespace

GateService::GateService(CalibrationArtifact artifact, GateOptions options)
    : artifact_(std::move(artifact)), options_(options) {
  validate_artifact(artifact_);
  digest_ = calibration_digest(artifact_);
}

HttpReply GateService::gate(const std::string& body) const {
  try {
    const auto req = parse_request(parse_body(body));
    const auto d = gate_one(req.probs, artifact_, req.mode, options_);
    return {200, decision_body(d, digest_).dump(), to_string(d.status)};
  } catch (const RequestError& e) {
    return {e.status, error_body(e.message).dump(), "error"};
  } catch (const ValidationError& e) {
    return {422, error_body(e.what()).dump(), "error"};
  } catch (const std::exception& e) {
    return {500, error_body(e.what()).dump(), "error"};
  }
}

HttpReply GateService::gate_batch(const std::string& body) const {
  std::size_t index = 0;
  try {
    const json doc = parse_body(body);
    if (!doc.is_array()) throw RequestError{400, "batch body must be a JSON array"};
    std::vector<ParsedRequest> requests;
    requests.reserve(doc.size());
    for (index = 0; index < doc.size(); ++index) requests.push_back(parse_request(doc[index]));

    json out = json::array();
    std::size_t accepted = 0;
    for (index = 0; index < requests.size(); ++index) {
      const auto d = gate_one(requests[index].probs, artifact_, requests[index].mode, options_);
      accepted += d.accepted() ? 1 : 0;
      out.push_back(decision_body(d, digest_));
    }
    return {200, out.dump(),
            std::to_string(accepted) + "/" + std::to_string(requests.size()) + " accept"};
  } catch (const RequestError& e) {
    return {e.status, error_body(e.message, index).dump(), "error"};
  } catch (const ValidationError& e) {
    return {422, error_body(e.what(), index).dump(), "error"};
  } catch (const std::exception& e) {
    return {500, error_body(e.what()).dump(), "error"};
  }
}

HttpReply GateService::calibration() const {
  json thresholds = json::array();
  for (const auto& e : artifact_.thresholds.entries())
    thresholds.push_back({{"class", e.cls},
                          {"value", e.finite() ? json(e.threshold) : json(nullptr)},
                          {"source", to_string(e.source)}});
  const auto& m = artifact_.metadata;
  const json body = {{"schema_version", kWireSchemaVersion},
                     {"calibration_schema_version", kCalibrationSchemaVersion},
                     {"k", artifact_.k()},
                     {"support", artifact_.centroids.supports()},
                     {"thresholds", std::move(thresholds)},
                     {"metadata",
                      {{"provenance", m.provenance},
                       {"created", m.created},
                       {"tool_version", m.tool_version},
                       {"fallback", to_string(m.options.fallback)},
                       {"grouping", to_string(m.options.grouping)}}},
                     {"calibration_digest", digest_}};
  return {200, body.dump(), "-"};
}

HttpReply GateService::health() const {
  return {200, json{{"status", "ok"}, {"calibration_digest", digest_}}.dump(), "-"};
}

// ---- HTTP binding --------------------------------------------------------

struct GateServer::Impl {
  const GateService& service;
  ServerOptions options;
  httplib::Server http;
  std::mutex log_mu;
  int bound_port = -1;

  Impl(const GateService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  void log(const httplib::Request& req, int status, std::chrono::steady_clock::duration took,
           const std::string& decision) {
    if (!options.log) return;
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(took).count();
    const json line = {{"method", req.method}, {"path", req.path},  {"status", status},
                       {"latency_us", micros}, {"decision", decision}};
    std::lock_guard<std::mutex> lock(log_mu);
    *options.log << line.dump() << '\n' << std::flush;
  }

  template <class Handler>
  httplib::Server::Handler wrap(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      const HttpReply reply = handler(req);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
      log(req, reply.status, std::chrono::steady_clock::now() - start, reply.decision);
    };
  }

  void routes() {
    http.Post("/v1/gate", wrap([this](const httplib::Request& r) { return service.gate(r.body); }));
    http.Post("/v1/gate/batch",
              wrap([this](const httplib::Request& r) { return service.gate_batch(r.body); }));
    http.Get("/v1/calibration", wrap([this](const httplib::Request&) { return service.calibration(); }));
    http.Get("/healthz", wrap([this](const httplib::Request&) { return service.health(); }));
  }
};

GateServer::GateServer(const GateService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

GateServer::~GateServer() {
  if (impl_->http.is_running()) impl_->http.stop();
}

int GateServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = impl_->http.bind_to_any_port(o.host);
  } else {
    impl_->bound_port = impl_->http.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (impl_->bound_port < 0)
    throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
  return impl_->bound_port;
}

void GateServer::listen() {
  if (impl_->bound_port < 0) throw Error("listen() before bind()");
  impl_->http.listen_after_bind();
}

void GateServer::stop() { impl_->http.stop(); }

bool GateServer::running() const { return impl_->http.is_running(); }

}  // namespace softgate
