// spacectl: route natural-language building commands to building APIs.
//
//   spacectl route "I'm leaving the office"
//   spacectl serve --config fixtures/pipeline.json
//   spacectl index build --out index.json
//   spacectl validate
//   spacectl simulate --listen 127.0.0.1:8081

#include <CLI11.hpp>
#include <signal.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <iostream>
#include <nlohmann/json.hpp>

#include "spacectl/building_simulator.hpp"
#include "spacectl/pipeline.hpp"

namespace {

using json = nlohmann::json;
using namespace spacectl;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitRejected = 3;

struct GlobalOptions {
  std::string config_path = "fixtures/pipeline.json";
  std::optional<double> tau;
  std::string provider;
  bool dry_run = false;
  std::string log_level = "info";
};

PipelineConfig resolve_config(const GlobalOptions& g) {
  auto config = load_config(g.config_path);
  if (g.tau) {
    Threshold check(*g.tau);
    config.tau = *g.tau;
  }
  if (g.provider == "local") {
    config.provider.kind = ProviderKind::local_hash;
    if (!config.provider.dim) config.provider.dim = kDefaultLocalHashDim;
  } else if (g.provider == "remote") {
    config.provider.kind = ProviderKind::remote;
  }
  if (g.dry_run) config.dry_run = true;
  return config;
}

void wait_for_shutdown_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info(json{{"event", "shutdown"}, {"signal", sig}}.dump());
}

// Blocked before any thread starts so sigwait in main sees the signal.
void block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

bool is_config_error(Errc code) {
  switch (code) {
    case Errc::ConfigError:
    case Errc::FixtureLoadError:
    case Errc::InvalidThreshold:
    case Errc::EmptyText:
    case Errc::SchemaError:
    case Errc::IoError:
      return true;
    default:
      return false;
  }
}

int run_route(const GlobalOptions& g, const std::string& text) {
  auto pipeline = Pipeline::from_config(resolve_config(g));
  PipelineResponse response;
  try {
    response = pipeline->handle_message(text);
  } catch (const PipelineError& e) {
    std::cerr << "route: " << e.what() << "\n";
    return is_config_error(e.code()) ? kExitConfig : kExitRuntime;
  }
  std::cout << to_json(response).dump(2, ' ', false, json::error_handler_t::replace) << "\n";
  if (response.decision.status == DecisionStatus::rejected) return kExitRejected;
  if (response.report && response.report->overall != TransactionOutcome::success) return kExitRuntime;
  return kExitOk;
}

int run_serve(const GlobalOptions& g) {
  block_shutdown_signals();
  auto pipeline = Pipeline::from_config(resolve_config(g));
  ChatService service(*pipeline);
  std::cerr << "serving on " << service.base_url() << "\n";
  wait_for_shutdown_signal();
  service.stop();
  return kExitOk;
}

int run_index_build(const GlobalOptions& g, std::string exemplars, const std::string& out,
                    const std::string& model_out) {
  auto config = resolve_config(g);
  const auto source = exemplars.empty() ? config.exemplars_path : std::filesystem::path(exemplars);
  auto provider = make_provider(config.provider);
  auto index = build_index(load_exemplar_texts(source), *provider);
  save_index(index, out);
  std::cerr << "wrote " << index.size() << " exemplars (dim " << index.dim() << ") to " << out << "\n";
  if (!model_out.empty()) {
    auto model = CentroidModel::train(index.list());
    std::ofstream(model_out) << model.to_json().dump(2) << "\n";
    std::cerr << "wrote " << model.centroids().size() << " centroids to " << model_out << "\n";
  }
  return kExitOk;
}

int run_validate(const GlobalOptions& g, const std::string& building) {
  auto config = resolve_config(g);
  int problems = 0;

  json registry_doc;
  try {
    registry_doc = json::parse(read_text_file(config.registry_path));
  } catch (const std::exception& e) {
    std::cerr << config.registry_path.string() << ": " << e.what() << "\n";
    return kExitConfig;
  }
  std::set<std::string> api_ids;
  if (!registry_doc.is_array()) {
    std::cerr << "registry: not a JSON array\n";
    ++problems;
  } else {
    for (std::size_t i = 0; i < registry_doc.size(); ++i) {
      for (const auto& v : validate_json(registry_doc[i])) {
        std::cerr << "registry entry " << i << " " << v.field << ": " << v.message << "\n";
        ++problems;
      }
      if (registry_doc[i].is_object() && registry_doc[i].contains("api_id") &&
          registry_doc[i]["api_id"].is_string()) {
        const auto id = registry_doc[i]["api_id"].get<std::string>();
        if (!api_ids.insert(id).second) {
          std::cerr << "registry entry " << i << " api_id: duplicate '" << id << "'\n";
          ++problems;
        }
      }
    }
  }

  std::size_t exemplar_count = 0;
  try {
    auto provider = make_provider(config.provider);
    auto index = load_exemplars(config.exemplars_path, *provider);
    exemplar_count = index.size();
    for (const auto& [api_id, count] : index.label_counts()) {
      if (!api_ids.contains(api_id)) {
        std::cerr << "exemplars: class '" << api_id << "' has no registry entry\n";
        ++problems;
      }
    }
    CentroidModel::train(index.list());
  } catch (const std::exception& e) {
    std::cerr << "exemplars: " << e.what() << "\n";
    ++problems;
  }

  if (!building.empty()) {
    try {
      sim::load_state(building);
    } catch (const std::exception& e) {
      std::cerr << "building: " << e.what() << "\n";
      ++problems;
    }
  }

  std::cout << json{{"valid", problems == 0},
                    {"problems", problems},
                    {"apis", api_ids.size()},
                    {"exemplars", exemplar_count}}
                   .dump()
            << "\n";
  return problems == 0 ? kExitOk : kExitConfig;
}

int run_simulate(const std::vector<std::string>& fixtures, const std::string& listen) {
  block_shutdown_signals();
  std::map<std::string, sim::BuildingState> states;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    auto state = sim::load_state(fixtures[i]);
    if (i == 0) states.emplace("default", state);
    states.emplace(std::filesystem::path(fixtures[i]).stem().string(), std::move(state));
  }
  sim::BuildingSimulator simulator(std::move(states));
  auto [host, port] = parse_listen_address(listen);
  sim::SimulatorServer server(simulator, host, port);
  std::cerr << "building simulator on " << server.base_url() << "\n";
  wait_for_shutdown_signal();
  server.stop();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Route natural-language building commands to building APIs"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Pipeline config (JSON)");
  app.add_option("--tau", g.tau, "Relevance threshold in (0, 1]");
  app.add_option("--provider", g.provider, "Embedding provider")->check(CLI::IsMember({"local", "remote"}));
  app.add_flag("--dry-run", g.dry_run, "Decide but do not call building APIs");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

  auto* serve = app.add_subcommand("serve", "Run the chat HTTP service");

  std::string route_text;
  auto* route = app.add_subcommand("route", "Route one message and print the response JSON");
  route->add_option("text", route_text, "Message text")->required();

  auto* index = app.add_subcommand("index", "Exemplar index maintenance");
  index->require_subcommand(1);
  std::string index_exemplars, index_out, model_out;
  auto* build = index->add_subcommand("build", "Embed exemplar texts into a snapshot");
  build->add_option("--exemplars", index_exemplars, "Exemplar source (defaults to config)");
  build->add_option("--out", index_out, "Snapshot path")->required();
  build->add_option("--model-out", model_out, "Also write the centroid model");

  std::string building;
  auto* validate_cmd = app.add_subcommand("validate", "Check registry and exemplar fixtures");
  validate_cmd->add_option("--building", building, "Also check a simulator fixture");

  std::vector<std::string> sim_fixtures{"fixtures/building.json"};
  std::string sim_listen = "127.0.0.1:8081";
  auto* simulate = app.add_subcommand("simulate", "Run the building simulator");
  simulate->add_option("--fixture", sim_fixtures, "Building fixture(s); the first is 'default'");
  simulate->add_option("--listen", sim_listen, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("spacectl");
  logger->set_pattern("%v");
  logger->set_level(spdlog::level::from_str(g.log_level));
  spdlog::set_default_logger(logger);

  try {
    if (*serve) return run_serve(g);
    if (*route) return run_route(g, route_text);
    if (*build) return run_index_build(g, index_exemplars, index_out, model_out);
    if (*validate_cmd) return run_validate(g, building);
    if (*simulate) return run_simulate(sim_fixtures, sim_listen);
  } catch (const Error& e) {
    std::cerr << "spacectl: " << e.what() << "\n";
    return is_config_error(e.code()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "spacectl: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
