#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spacectl/api_registry.hpp"
#include "spacectl/dispatch.hpp"
#include "spacectl/embedding.hpp"
#include "spacectl/error.hpp"
#include "spacectl/intent_classifier.hpp"
#include "spacectl/vector_index.hpp"

namespace spacectl {

struct PipelineConfig {
  ProviderConfig provider;
  double tau = kDefaultRemoteThreshold;
  std::filesystem::path exemplars_path;
  std::filesystem::path registry_path;
  std::string listen_address = "127.0.0.1:8080";
  bool dry_run = false;
  std::chrono::milliseconds call_timeout = kDefaultCallTimeout;
  // GET /state on the service proxies here when set.
  std::optional<std::string> building_state_url;
  std::string cors_origin = "*";
};

// Relative paths resolve against base_dir. Throws ConfigError.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// Exemplar source file: [{"apiId", "order", "recordId"?}, ...]. Missing
// recordIds become "<apiId>-NN" numbered per class from 01.
struct ExemplarText {
  std::string record_id;
  std::string api_id;
  std::string order;
};

std::vector<ExemplarText> exemplar_texts_from_json(const nlohmann::json& doc);
std::vector<ExemplarText> load_exemplar_texts(const std::filesystem::path& path);
VectorIndex build_index(const std::vector<ExemplarText>& texts, const EmbeddingProvider& provider);

// Accepts either an index snapshot or an exemplar source file.
VectorIndex load_exemplars(const std::filesystem::path& path, const EmbeddingProvider& provider);

struct TraceStep {
  int step = 0;
  std::string name;
  std::chrono::microseconds duration{0};
  std::string summary;
};

struct PipelineResponse {
  IntentDecision decision;
  std::optional<TransactionReport> report;
  std::vector<TraceStep> trace;
  bool dry_run = false;
};

// A failed message together with the steps that ran before the failure.
class PipelineError : public Error {
 public:
  PipelineError(Errc code, const std::string& message, std::vector<TraceStep> trace);
  const std::vector<TraceStep>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceStep> trace_;
};

// Receive, embed, gate, classify, resolve, execute. Read-only after construction,
// so one instance serves concurrent messages.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::unique_ptr<EmbeddingProvider> provider, VectorIndex index,
           Registry registry);

  // Loads exemplars and registry named by the config; throws FixtureLoadError.
  static std::unique_ptr<Pipeline> from_config(PipelineConfig config);

  PipelineResponse handle_message(std::string_view text, const AttemptObserver& observer = {}) const;

  const PipelineConfig& config() const noexcept { return config_; }
  const VectorIndex& index() const noexcept { return index_; }
  const CentroidModel& model() const noexcept { return model_; }
  const Registry& registry() const noexcept { return registry_; }

 private:
  PipelineConfig config_;
  Threshold tau_;
  std::unique_ptr<EmbeddingProvider> provider_;
  VectorIndex index_;
  CentroidModel model_;
  Registry registry_;
};

nlohmann::json to_json(const TraceStep& step);
nlohmann::json to_json(const PipelineResponse& response);

// HTTP front for a Pipeline:
//   POST /chat {"message"}, GET /healthz, GET /apis, GET /exemplars, GET /state
class ChatService {
 public:
  // Binds listen_address from the pipeline config; port 0 picks an ephemeral port.
  explicit ChatService(const Pipeline& pipeline);
  ~ChatService();
  ChatService(const ChatService&) = delete;
  ChatService& operator=(const ChatService&) = delete;

  int port() const;
  std::string base_url() const;
  // Stops accepting connections and waits for in-flight handlers.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits "host:port".
std::pair<std::string, int> parse_listen_address(std::string_view address);

}  // namespace spacectl
