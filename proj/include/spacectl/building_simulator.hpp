#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace spacectl::sim {

enum class Power { on, off };

struct AirconState {
  Power power = Power::off;
  std::optional<double> setpoint;  // degrees Celsius
  friend bool operator==(const AirconState&, const AirconState&) = default;
};

struct LightState {
  Power power = Power::off;
  friend bool operator==(const LightState&, const LightState&) = default;
};

struct ElevatorState {
  int current_floor = 1;
  std::string last_operation;
  friend bool operator==(const ElevatorState&, const ElevatorState&) = default;
};

struct Space {
  std::vector<std::string> ac_ids;
  std::vector<std::string> light_ids;
  int floor = 1;
  friend bool operator==(const Space&, const Space&) = default;
};

struct BuildingState {
  std::map<std::string, AirconState> aircons;
  std::map<std::string, LightState> lights;
  ElevatorState elevator;
  std::map<std::string, Space> spaces;
  friend bool operator==(const BuildingState&, const BuildingState&) = default;
};

// Throws SchemaError when a space references an unknown device or a power
// value is not "on"/"off".
BuildingState state_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const BuildingState& state);
BuildingState load_state(const std::filesystem::path& path);

struct RequestLogEntry {
  std::uint64_t seq = 0;
  std::string method;
  std::string path;
  std::string body;
  std::chrono::system_clock::time_point timestamp;
};

nlohmann::json to_json(const RequestLogEntry& entry);

struct Response {
  int status = 200;
  std::string body;
};

// Device-API state machine. Every request under /api/ is logged, accepted or
// not; state and log change together under one lock.
class BuildingSimulator {
 public:
  explicit BuildingSimulator(std::map<std::string, BuildingState> fixtures,
                             std::string initial_fixture = "default");

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  BuildingState get_state() const;
  // Entries with seq > since_seq.
  std::vector<RequestLogEntry> get_log(std::uint64_t since_seq = 0) const;
  // Restores the named fixture and clears the log (seq restarts at 1).
  void reset(std::string_view fixture);
  std::vector<std::string> fixture_names() const;

 private:
  Response apply_aircon(const nlohmann::json& body);
  Response apply_light(const nlohmann::json& body);
  Response apply_elevator(const nlohmann::json& body);

  mutable std::mutex mutex_;
  std::map<std::string, BuildingState, std::less<>> fixtures_;
  BuildingState state_;
  std::vector<RequestLogEntry> log_;
  std::uint64_t next_seq_ = 1;
};

// Parses "<floor>f<up|down>"; returns the floor.
std::optional<int> parse_elevator_operation(std::string_view operation);

// Serves a BuildingSimulator over HTTP on a background thread:
//   PUT /api/airconditioner, PUT /api/light, PUT /api/elevator,
//   GET /state, GET /log?since=N, POST /reset {"fixture": name}
class SimulatorServer {
 public:
  // port 0 binds an ephemeral port.
  SimulatorServer(BuildingSimulator& simulator, const std::string& host = "127.0.0.1", int port = 0);
  ~SimulatorServer();
  SimulatorServer(const SimulatorServer&) = delete;
  SimulatorServer& operator=(const SimulatorServer&) = delete;

  int port() const;
  std::string base_url() const;
  void stop();
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spacectl::sim
