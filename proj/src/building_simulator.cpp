#include "spacectl/building_simulator.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "spacectl/error.hpp"
#include "spacectl/vector_index.hpp"

namespace spacectl::sim {

using json = nlohmann::json;

namespace {

std::optional<Power> parse_power(const json& v) {
  if (!v.is_string()) return std::nullopt;
  if (v == "on") return Power::on;
  if (v == "off") return Power::off;
  return std::nullopt;
}

std::string_view power_name(Power p) { return p == Power::on ? "on" : "off"; }

Response ok() { return {200, R"({"ok":true})"}; }

Response fail(int status, const std::string& message) {
  return {status, json{{"ok", false}, {"error", message}}.dump()};
}

std::optional<std::string> foreign_field(const json& body, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : body.items()) {
    if (!allowed.contains(key)) return key;
  }
  return std::nullopt;
}

}  // namespace

BuildingState state_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::SchemaError, "building state must be an object");
  BuildingState s;
  try {
    const json aircons = doc.value("aircons", json::object());
    const json lights = doc.value("lights", json::object());
    const json spaces = doc.value("spaces", json::object());
    for (const auto& [id, ac] : aircons.items()) {
      auto power = parse_power(ac.at("power"));
      if (!power) throw Error(Errc::SchemaError, "aircon '" + id + "': power must be on|off");
      AirconState a{*power, std::nullopt};
      if (ac.contains("setpoint") && !ac["setpoint"].is_null()) a.setpoint = ac["setpoint"].get<double>();
      s.aircons.emplace(id, a);
    }
    for (const auto& [id, light] : lights.items()) {
      auto power = parse_power(light.at("power"));
      if (!power) throw Error(Errc::SchemaError, "light '" + id + "': power must be on|off");
      s.lights.emplace(id, LightState{*power});
    }
    if (doc.contains("elevator")) {
      s.elevator.current_floor = doc["elevator"].value("current_floor", 1);
      s.elevator.last_operation = doc["elevator"].value("last_operation", "");
    }
    for (const auto& [id, space] : spaces.items()) {
      Space sp;
      sp.ac_ids = space.value("ac_ids", std::vector<std::string>{});
      sp.light_ids = space.value("light_ids", std::vector<std::string>{});
      sp.floor = space.value("floor", 1);
      for (const auto& ac : sp.ac_ids) {
        if (!s.aircons.contains(ac)) throw Error(Errc::SchemaError, "space '" + id + "' references unknown aircon '" + ac + "'");
      }
      for (const auto& l : sp.light_ids) {
        if (!s.lights.contains(l)) throw Error(Errc::SchemaError, "space '" + id + "' references unknown light '" + l + "'");
      }
      s.spaces.emplace(id, std::move(sp));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("building state: ") + e.what());
  }
  return s;
}

json to_json(const BuildingState& s) {
  json aircons = json::object();
  for (const auto& [id, ac] : s.aircons) {
    aircons[id] = {{"power", power_name(ac.power)},
                   {"setpoint", ac.setpoint ? json(*ac.setpoint) : json(nullptr)}};
  }
  json lights = json::object();
  for (const auto& [id, l] : s.lights) lights[id] = {{"power", power_name(l.power)}};
  json spaces = json::object();
  for (const auto& [id, sp] : s.spaces) {
    spaces[id] = {{"ac_ids", sp.ac_ids}, {"light_ids", sp.light_ids}, {"floor", sp.floor}};
  }
  return {{"aircons", std::move(aircons)},
          {"lights", std::move(lights)},
          {"elevator", {{"current_floor", s.elevator.current_floor},
                        {"last_operation", s.elevator.last_operation}}},
          {"spaces", std::move(spaces)}};
}

BuildingState load_state(const std::filesystem::path& path) {
  try {
    return state_from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
}

json to_json(const RequestLogEntry& e) {
  return {{"seq", e.seq},
          {"method", e.method},
          {"path", e.path},
          {"body", e.body},
          {"timestamp", format_rfc3339(e.timestamp)}};
}

std::optional<int> parse_elevator_operation(std::string_view op) {
  const auto f = op.find('f');
  if (f == std::string_view::npos || f == 0) return std::nullopt;
  const auto digits = op.substr(0, f);
  const auto direction = op.substr(f + 1);
  if (direction != "up" && direction != "down") return std::nullopt;
  unsigned floor = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), floor);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  if (floor > static_cast<unsigned>(std::numeric_limits<int>::max())) return std::nullopt;
  return static_cast<int>(floor);
}

BuildingSimulator::BuildingSimulator(std::map<std::string, BuildingState> fixtures,
                                     std::string initial_fixture)
    : fixtures_(fixtures.begin(), fixtures.end()) {
  auto it = fixtures_.find(initial_fixture);
  if (it == fixtures_.end()) throw Error(Errc::UnknownFixture, "no fixture named '" + initial_fixture + "'");
  state_ = it->second;
}

Response BuildingSimulator::handle(std::string_view method, std::string_view path,
                                   std::string_view body) {
  std::lock_guard lock(mutex_);
  log_.push_back({next_seq_++, std::string(method), std::string(path), std::string(body),
                  std::chrono::system_clock::now()});

  const bool known = path == "/api/airconditioner" || path == "/api/light" || path == "/api/elevator";
  if (!known) return fail(404, "no such device API");
  if (method != "PUT") return fail(405, "device APIs accept PUT only");

  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return fail(400, "body must be a JSON object");

  if (path == "/api/airconditioner") return apply_aircon(doc);
  if (path == "/api/light") return apply_light(doc);
  return apply_elevator(doc);
}

Response BuildingSimulator::apply_aircon(const json& body) {
  if (auto f = foreign_field(body, {"ac_id", "on_off", "setpoint"})) {
    return fail(400, "unexpected field '" + *f + "'");
  }
  if (!body.contains("ac_id") || !body["ac_id"].is_string()) return fail(400, "ac_id is required");
  if (!body.contains("on_off") && !body.contains("setpoint")) return fail(400, "on_off or setpoint is required");
  std::optional<Power> power;
  if (body.contains("on_off")) {
    power = parse_power(body["on_off"]);
    if (!power) return fail(400, "on_off must be \"on\" or \"off\"");
  }
  std::optional<double> setpoint;
  if (body.contains("setpoint")) {
    if (!body["setpoint"].is_number() || !std::isfinite(body["setpoint"].get<double>())) {
      return fail(400, "setpoint must be a number");
    }
    setpoint = body["setpoint"].get<double>();
  }
  auto it = state_.aircons.find(body["ac_id"].get<std::string>());
  if (it == state_.aircons.end()) return fail(404, "unknown ac_id");
  if (power) it->second.power = *power;
  if (setpoint) it->second.setpoint = setpoint;
  return ok();
}

Response BuildingSimulator::apply_light(const json& body) {
  if (auto f = foreign_field(body, {"light_id", "on_off"})) {
    return fail(400, "unexpected field '" + *f + "'");
  }
  if (!body.contains("light_id") || !body["light_id"].is_string()) return fail(400, "light_id is required");
  auto power = body.contains("on_off") ? parse_power(body["on_off"]) : std::nullopt;
  if (!power) return fail(400, "on_off must be \"on\" or \"off\"");
  auto it = state_.lights.find(body["light_id"].get<std::string>());
  if (it == state_.lights.end()) return fail(404, "unknown light_id");
  it->second.power = *power;
  return ok();
}

Response BuildingSimulator::apply_elevator(const json& body) {
  if (auto f = foreign_field(body, {"operation"})) return fail(400, "unexpected field '" + *f + "'");
  if (!body.contains("operation") || !body["operation"].is_string()) return fail(400, "operation is required");
  const auto op = body["operation"].get<std::string>();
  auto floor = parse_elevator_operation(op);
  if (!floor) return fail(400, "operation must look like <floor>f<up|down>");
  state_.elevator.current_floor = *floor;
  state_.elevator.last_operation = op;
  return ok();
}

BuildingState BuildingSimulator::get_state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::vector<RequestLogEntry> BuildingSimulator::get_log(std::uint64_t since_seq) const {
  std::lock_guard lock(mutex_);
  std::vector<RequestLogEntry> out;
  for (const auto& e : log_) {
    if (e.seq > since_seq) out.push_back(e);
  }
  return out;
}

void BuildingSimulator::reset(std::string_view fixture) {
  std::lock_guard lock(mutex_);
  auto it = fixtures_.find(fixture);
  if (it == fixtures_.end()) throw Error(Errc::UnknownFixture, "no fixture named '" + std::string(fixture) + "'");
  state_ = it->second;
  log_.clear();
  next_seq_ = 1;
}

std::vector<std::string> BuildingSimulator::fixture_names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : fixtures_) out.push_back(name);
  return out;
}

struct SimulatorServer::Impl {
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;
};

SimulatorServer::SimulatorServer(BuildingSimulator& simulator, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // silently share the port instead of failing to bind.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"}});
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  auto device = [&simulator](const httplib::Request& req, httplib::Response& res) {
    auto r = simulator.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  for (const char* path : {"/api/airconditioner", "/api/light", "/api/elevator"}) {
    srv.Put(path, device);
    srv.Get(path, device);
    srv.Post(path, device);
    srv.Delete(path, device);
  }
  srv.Get("/state", [&simulator](const httplib::Request&, httplib::Response& res) {
    res.set_content(to_json(simulator.get_state()).dump(), "application/json");
  });
  srv.Get("/log", [&simulator](const httplib::Request& req, httplib::Response& res) {
    std::uint64_t since = 0;
    if (req.has_param("since")) {
      const auto text = req.get_param_value("since");
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), since);
      if (ec != std::errc{} || ptr != text.data() + text.size()) {
        res.status = 400;
        res.set_content(R"({"ok":false,"error":"since must be a non-negative integer"})", "application/json");
        return;
      }
    }
    json entries = json::array();
    for (const auto& e : simulator.get_log(since)) entries.push_back(to_json(e));
    res.set_content(entries.dump(), "application/json");
  });
  srv.Post("/reset", [&simulator](const httplib::Request& req, httplib::Response& res) {
    json doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("fixture") || !doc["fixture"].is_string()) {
      res.status = 400;
      res.set_content(R"({"ok":false,"error":"expected {\"fixture\": name}"})", "application/json");
      return;
    }
    try {
      simulator.reset(doc["fixture"].get<std::string>());
      res.set_content(R"({"ok":true})", "application/json");
    } catch (const Error& e) {
      res.status = 404;
      res.set_content(json{{"ok", false}, {"error", e.what()}}.dump(), "application/json");
    }
  });
  // Unmatched device paths still reach the state machine so they are logged.
  srv.set_error_handler([&simulator](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty() && req.path.rfind("/api/", 0) == 0) {
      auto r = simulator.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    }
  });

  impl_->host = host;
  if (port == 0) {
    impl_->port = srv.bind_to_any_port(host);
  } else {
    impl_->port = srv.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port <= 0) {
    throw Error(Errc::BindError, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

SimulatorServer::~SimulatorServer() { stop(); }

int SimulatorServer::port() const { return impl_->port; }

std::string SimulatorServer::base_url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

void SimulatorServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void SimulatorServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace spacectl::sim
