#include "scoring/api.hpp"

#include "scoring/codec.hpp"
#include "scoring/pipeline.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace scoring {

using nlohmann::json;

std::pair<std::string, int> parse_listen_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
    throw std::invalid_argument("expected HOST:PORT, got '" + addr + "'");
  const std::string port_text = addr.substr(colon + 1);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("port");
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid port in '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range in '" + addr + "'");
  return {addr.substr(0, colon), port};
}

ApiConfig ApiConfig::from_env() {
  ApiConfig cfg;
  if (const char* addr = std::getenv("SCORING_LISTEN_ADDR"); addr && *addr) {
    auto [host, port] = parse_listen_addr(addr);
    cfg.host = host;
    cfg.port = port;
  }
  cfg.batch_parallelism = std::max(1u, std::thread::hardware_concurrency());
  if (const char* par = std::getenv("SCORING_BATCH_PARALLELISM"); par && *par) {
    const int n = std::atoi(par);
    if (n > 0) cfg.batch_parallelism = static_cast<unsigned>(n);
  }
  if (const char* origin = std::getenv("SCORING_CONSOLE_ORIGIN"); origin && *origin) cfg.console_origin = origin;
  return cfg;
}

int http_status_for(const std::string& code) {
  if (code == "model_not_found") return 404;
  if (code == "no_matching_rule" || code == "missing_attribute" || code == "kind_mismatch" ||
      code == "no_eligible_model" || code == "validation_rejected")
    return 422;
  if (code == "malformed_request" || code == "parse_error") return 400;
  return 500;
}

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                json extra = json::object()) {
  json body = {{"code", code}, {"message", message}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  send_json(res, status, body);
}

void send_error(httplib::Response& res, const ScoringError& e) {
  json body = error_to_json(e);
  if (const auto* rejected = dynamic_cast<const ValidationRejected*>(&e))
    body["findings"] = findings_to_json(rejected->findings());
  send_json(res, http_status_for(e.code()), body);
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw MalformedRequest("request body is empty");
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw MalformedRequest(std::string("invalid JSON: ") + e.what());
  }
}

std::int64_t path_id(const httplib::Request& req) {
  try {
    return std::stoll(req.matches[1].str());
  } catch (const std::exception&) {
    throw MalformedRequest("invalid model id '" + req.matches[1].str() + "'");
  }
}

// Wraps a handler so that every failure becomes a closed-set error body.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ScoringError& e) {
      send_error(res, e);
    } catch (const std::exception&) {
      send_error(res, 500, "internal", "internal error");
    }
  };
}

}  // namespace

struct ScoringService::Impl {
  ModelStore& store;
  ApiConfig config;
  httplib::Server server;

  Impl(ModelStore& s, ApiConfig c) : store(s), config(std::move(c)) { routes(); }

  void routes() {
    server.Post("/v1/score", guarded([this](const httplib::Request& req, httplib::Response& res) {
      SnapshotPtr snap = store.snapshot();
      ScoreRequest request = request_from_json(parse_body(req));
      res.status = 200;
      res.set_content(score_response_body(score_one(*snap, request)), kJson);
    }));

    server.Post("/v1/score/batch", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string type = req.get_header_value("Content-Type");
      if (type.rfind("application/x-ndjson", 0) != 0)
        throw MalformedRequest("batch body must be application/x-ndjson");
      SnapshotPtr snap = store.snapshot();
      auto body = std::make_shared<std::string>(req.body);
      const unsigned parallelism = config.batch_parallelism;
      res.status = 200;
      res.set_chunked_content_provider(
          "application/x-ndjson", [snap, body, parallelism](std::size_t, httplib::DataSink& sink) {
            std::size_t pos = 0;
            LineSource source = [&]() -> std::optional<std::string> {
              if (pos >= body->size()) return std::nullopt;
              std::size_t nl = body->find('\n', pos);
              if (nl == std::string::npos) nl = body->size();
              std::string line = body->substr(pos, nl - pos);
              pos = nl + 1;
              return line;
            };
            bool open = true;
            LineSink out = [&](const std::string& line) {
              if (!open) return;
              const std::string l = line + "\n";
              open = sink.write(l.data(), l.size());
            };
            BatchReport report = score_batch(*snap, source, out, BatchOptions{ErrorPolicy::SkipAndReport, parallelism});
            out(json{{"report", report_to_json(report)}}.dump());
            sink.done();
            return true;
          });
    }));

    server.Get("/v1/models", guarded([this](const httplib::Request&, httplib::Response& res) {
      SnapshotPtr snap = store.snapshot();
      json arr = json::array();
      for (const auto& [id, m] : snap->models)
        arr.push_back({{"model_id", id},
                       {"name", m.name},
                       {"version", m.version},
                       {"algorithm", std::string(algorithm_kind(m.algorithm))}});
      send_json(res, 200, arr);
    }));

    server.Get(R"(/v1/models/(-?\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      SnapshotPtr snap = store.snapshot();
      send_json(res, 200, model_to_json(get_model(*snap, path_id(req))));
    }));

    server.Put(R"(/v1/models/(-?\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::int64_t id = path_id(req);
      json doc = parse_body(req);
      std::optional<std::int64_t> base_version;
      if (doc.is_object() && doc.contains("base_version")) {
        if (!doc["base_version"].is_number_integer()) throw MalformedRequest("base_version: expected an integer");
        base_version = doc["base_version"].get<std::int64_t>();
        doc.erase("base_version");
      }
      ScoringModel model = model_from_json(doc);
      if (model.model_id != id) {
        send_error(res, 409, "malformed_request",
                   "body model_id " + std::to_string(model.model_id) + " does not match path id " + std::to_string(id));
        return;
      }
      try {
        SnapshotPtr next = store.upsert(std::move(model), base_version);
        send_json(res, 200, {{"model_id", id}, {"version", next->models.at(id).version}});
      } catch (const VersionConflict& e) {
        json body = error_to_json(e);
        send_json(res, 409, body);
      }
    }));

    server.Delete(R"(/v1/models/(-?\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      store.remove(path_id(req));
      res.status = 204;
    }));

    server.Post("/v1/models/validate", guarded([](const httplib::Request& req, httplib::Response& res) {
      ScoringModel model = model_from_json(parse_body(req));
      auto findings = validate_model(model);
      send_json(res, 200, {{"valid", !has_errors(findings)}, {"findings", findings_to_json(findings)}});
    }));

    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"snapshot_version", store.snapshot()->snapshot_version}});
    });

    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty() || res.status == 204) return httplib::Server::HandlerResponse::Unhandled;
      const std::string code = res.status == 404 ? "malformed_request" : (res.status >= 500 ? "internal" : "malformed_request");
      send_error(res, res.status, code, "no route for " + req.method + " " + req.path);
      return httplib::Server::HandlerResponse::Handled;
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, 500, "internal", "internal error");
    });

    if (config.console_origin) {
      const std::string origin = *config.console_origin;
      server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      });
      server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
      });
    }
  }
};

ScoringService::ScoringService(ModelStore& store, ApiConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {}

ScoringService::~ScoringService() { stop(); }

bool ScoringService::listen() { return impl_->server.listen(impl_->config.host, impl_->config.port); }

int ScoringService::bind_any_port() { return impl_->server.bind_to_any_port(impl_->config.host); }

bool ScoringService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void ScoringService::stop() {
  if (impl_) impl_->server.stop();
}

void ScoringService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace scoring
