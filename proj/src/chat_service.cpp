#include <httplib.h>
#include <spdlog/spdlog.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "spacectl/pipeline.hpp"
#include "spacectl/url.hpp"

namespace spacectl {

using json = nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

int status_for(Errc code) {
  switch (code) {
    case Errc::EmptyText:
    case Errc::ZeroVector:
      return 400;
    case Errc::ProviderUnreachable:
    case Errc::ProviderRejected:
    case Errc::DimensionMismatch:
      return 502;
    default:
      return 500;
  }
}

}  // namespace

struct ChatService::Impl {
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;
};

ChatService::ChatService(const Pipeline& pipeline) : impl_(std::make_unique<Impl>()) {
  const auto& config = pipeline.config();
  auto& srv = impl_->server;
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // silently share the port instead of failing to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  srv.set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Post("/chat", [&pipeline](const httplib::Request& req, httplib::Response& res) {
    json doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("message") ||
        !doc["message"].is_string()) {
      send_json(res, 400, {{"error", "expected {\"message\": string}"}, {"code", "BadRequest"}});
      return;
    }
    try {
      send_json(res, 200, to_json(pipeline.handle_message(doc["message"].get<std::string>())));
    } catch (const PipelineError& e) {
      json trace = json::array();
      for (const auto& s : e.trace()) trace.push_back(to_json(s));
      send_json(res, status_for(e.code()),
                {{"error", e.what()}, {"code", to_string(e.code())}, {"trace", std::move(trace)}});
    } catch (const Error& e) {
      send_json(res, status_for(e.code()), {{"error", e.what()}, {"code", to_string(e.code())}});
    }
  });

  srv.Get("/healthz", [&pipeline](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"},
                         {"exemplars", pipeline.index().size()},
                         {"apis", pipeline.registry().size()}});
  });

  srv.Get("/apis", [&pipeline](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, registry_to_json(pipeline.registry()));
  });

  srv.Get("/exemplars", [&pipeline](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : pipeline.index().list()) {
      out.push_back({{"recordId", r.record_id}, {"apiId", r.api_id}, {"order", r.order}});
    }
    send_json(res, 200, out);
  });

  srv.Get("/state", [&config](const httplib::Request&, httplib::Response& res) {
    if (!config.building_state_url) {
      send_json(res, 404, {{"error", "no building_state_url configured"}});
      return;
    }
    const auto url = parse_absolute_url(*config.building_state_url);
    if (!url) {
      send_json(res, 500, {{"error", "building_state_url is invalid"}});
      return;
    }
    httplib::Client client(url->origin());
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
    auto upstream = client.Get(url->target);
    if (!upstream || upstream->status != 200) {
      send_json(res, 502, {{"error", "building state unavailable"}});
      return;
    }
    res.set_content(upstream->body, "application/json");
  });

  auto [host, port] = parse_listen_address(config.listen_address);
  impl_->host = host;
  impl_->port = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (impl_->port <= 0) throw Error(Errc::BindError, "cannot bind " + config.listen_address);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  spdlog::info(json{{"event", "listening"}, {"address", base_url()}}.dump());
}

ChatService::~ChatService() { stop(); }

int ChatService::port() const { return impl_->port; }

std::string ChatService::base_url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

void ChatService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace spacectl
