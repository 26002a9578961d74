#pragma once

// Shared test helpers: fixture paths, random vectors, brute-force oracles and
// a live simulator with a registry pointed at it.

#include <arpa/inet.h>
#include <sys/wait.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <random>
#include <string>
#include <vector>

#include "spacectl/building_simulator.hpp"
#include "spacectl/pipeline.hpp"

namespace spacectl::testing {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline fs::path source_dir() { return SPACECTL_SOURCE_DIR; }
inline fs::path fixture(const std::string& name) { return source_dir() / "fixtures" / name; }
inline fs::path test_data(const std::string& name) { return source_dir() / "tests" / "data" / name; }

inline json read_json(const fs::path& p) { return json::parse(read_text_file(p)); }

inline std::vector<double> random_gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  return EmbeddingVector::normalized(random_gaussian(rng, dim));
}

// Independent reference: plain dot / (norm * norm) with the clamp.
inline double oracle_cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Full scan, then a stable sort of everything.
inline std::vector<std::pair<std::string, double>> oracle_knn(const std::vector<ExemplarRecord>& records,
                                                              const EmbeddingVector& query,
                                                              std::size_t k) {
  std::vector<std::pair<std::string, double>> all;
  for (const auto& r : records) {
    all.emplace_back(r.record_id, oracle_cosine(r.embedding.values(), query.values()));
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("spacectl-test-" + std::to_string(rd()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& name) const { return path / name; }
};

// A localhost port with nothing listening on it.
inline int closed_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

inline std::string rewrite_port(std::string text, int port) {
  const std::string from = "127.0.0.1:8081";
  const std::string to = "127.0.0.1:" + std::to_string(port);
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

struct CliRun {
  int exit_code = -1;
  std::string out;
};

// Runs the built CLI with stderr discarded.
inline CliRun run_cli(const std::vector<std::string>& args) {
  auto quote = [](const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
  };
  std::string cmd = quote(SPACECTL_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline sim::BuildingState fixture_building() { return sim::load_state(fixture("building.json")); }

// Simulator on an ephemeral port plus config files whose registry targets it.
struct LiveBuilding {
  sim::BuildingSimulator simulator{{{"default", fixture_building()}}};
  sim::SimulatorServer server{simulator};
  TempDir dir;

  fs::path registry_path() const {
    auto p = dir / "registry.json";
    if (!fs::exists(p)) write_text_file(p, rewrite_port(read_text_file(fixture("registry.json")), server.port()));
    return p;
  }

  json config_json(bool dry_run = false) const {
    auto doc = read_json(fixture("pipeline.json"));
    doc["exemplars_path"] = fixture("exemplars.json").string();
    doc["registry_path"] = registry_path().string();
    doc["listen_address"] = "127.0.0.1:0";
    doc["dry_run"] = dry_run;
    doc["building_state_url"] = server.base_url() + "/state";
    return doc;
  }

  fs::path write_config(bool dry_run = false) const {
    auto p = dir / (dry_run ? "pipeline-dry.json" : "pipeline.json");
    write_text_file(p, config_json(dry_run).dump(2));
    return p;
  }

  PipelineConfig config(bool dry_run = false) const { return load_config(write_config(dry_run)); }
};

}  // namespace spacectl::testing
