#include "spacectl/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <nlohmann/json.hpp>

namespace spacectl {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? base / path : path;
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::ConfigError, std::string("config field '") + key + "' has the wrong type");
  }
}

std::chrono::microseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start);
}

void log_step(const TraceStep& step, json extra = json::object()) {
  extra["step"] = step.step;
  extra["name"] = step.name;
  extra["duration_ms"] = static_cast<double>(step.duration.count()) / 1000.0;
  extra["summary"] = step.summary;
  spdlog::info(extra.dump(-1, ' ', false, json::error_handler_t::replace));
}

std::string describe_scores(double gate_similarity, double tau, const ExemplarRecord& best) {
  return "best exemplar '" + best.order + "' (" + best.api_id + ") similarity " +
         std::to_string(gate_similarity) + (gate_similarity >= tau ? " >= " : " < ") + "tau " +
         std::to_string(tau);
}

}  // namespace

PipelineConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
  PipelineConfig c;
  const json provider = doc.value("provider", json::object());
  const auto kind = field_or<std::string>(provider, "kind", "local_hash");
  if (kind == "local_hash" || kind == "local") {
    c.provider.kind = ProviderKind::local_hash;
  } else if (kind == "remote") {
    c.provider.kind = ProviderKind::remote;
  } else {
    throw Error(Errc::ConfigError, "provider.kind must be local_hash or remote");
  }
  c.provider.remote_base_url = field_or(provider, "remote_base_url", c.provider.remote_base_url);
  c.provider.remote_model_name = field_or(provider, "remote_model_name", c.provider.remote_model_name);
  c.provider.api_key_env_name = field_or(provider, "api_key_env_name", c.provider.api_key_env_name);
  if (provider.contains("dim") && !provider["dim"].is_null()) {
    const auto dim = field_or<long long>(provider, "dim", 0);
    if (dim <= 0) throw Error(Errc::ConfigError, "provider.dim must be positive");
    c.provider.dim = static_cast<std::size_t>(dim);
  }
  c.provider.timeout = std::chrono::milliseconds(field_or<long long>(provider, "timeout", c.provider.timeout.count()));
  c.provider.max_retries = field_or(provider, "max_retries", c.provider.max_retries);
  if (c.provider.max_retries < 0) throw Error(Errc::ConfigError, "provider.max_retries must be >= 0");
  if (c.provider.kind == ProviderKind::local_hash && !c.provider.dim) {
    throw Error(Errc::ConfigError, "provider.dim is required for local_hash");
  }

  c.tau = field_or(doc, "tau", c.tau);
  try {
    Threshold check(c.tau);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  c.exemplars_path = resolve(base_dir, field_or<std::string>(doc, "exemplars_path", ""));
  c.registry_path = resolve(base_dir, field_or<std::string>(doc, "registry_path", ""));
  c.listen_address = field_or(doc, "listen_address", c.listen_address);
  c.dry_run = field_or(doc, "dry_run", c.dry_run);
  c.call_timeout = std::chrono::milliseconds(field_or<long long>(doc, "call_timeout", c.call_timeout.count()));
  if (doc.contains("building_state_url") && !doc["building_state_url"].is_null()) {
    c.building_state_url = field_or<std::string>(doc, "building_state_url", "");
  }
  c.cors_origin = field_or(doc, "cors_origin", c.cors_origin);
  parse_listen_address(c.listen_address);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return config_from_json(doc, path.parent_path());
}

std::pair<std::string, int> parse_listen_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::ConfigError, "listen_address must be host:port");
  }
  int port = -1;
  const auto p = address.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
  if (ec != std::errc{} || ptr != p.data() + p.size() || port < 0 || port > 65535) {
    throw Error(Errc::ConfigError, "listen_address has an invalid port");
  }
  return {std::string(address.substr(0, colon)), port};
}

std::vector<ExemplarText> exemplar_texts_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(Errc::SchemaError, "exemplar file must be a JSON array");
  std::vector<ExemplarText> out;
  std::map<std::string, int> per_class;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    const auto where = "exemplars[" + std::to_string(i) + "]";
    for (const char* field : {"apiId", "order"}) {
      if (!e.is_object() || !e.contains(field) || !e[field].is_string() ||
          e[field].get<std::string>().empty()) {
        throw Error(Errc::SchemaError, where + ": missing field '" + field + "'", i);
      }
    }
    ExemplarText t;
    t.api_id = e["apiId"].get<std::string>();
    t.order = e["order"].get<std::string>();
    const int n = ++per_class[t.api_id];
    if (e.contains("recordId")) {
      t.record_id = e["recordId"].get<std::string>();
    } else {
      t.record_id = t.api_id + (n < 10 ? "-0" : "-") + std::to_string(n);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ExemplarText> load_exemplar_texts(const std::filesystem::path& path) {
  try {
    return exemplar_texts_from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
}

VectorIndex build_index(const std::vector<ExemplarText>& texts, const EmbeddingProvider& provider) {
  std::vector<std::string> orders;
  orders.reserve(texts.size());
  for (const auto& t : texts) orders.push_back(t.order);
  auto embeddings = provider.embed_batch(orders);

  VectorIndex index;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    index.insert({texts[i].record_id, texts[i].api_id, texts[i].order, std::move(embeddings[i])});
  }
  return index;
}

VectorIndex load_exemplars(const std::filesystem::path& path, const EmbeddingProvider& provider) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("records")) {
    auto index = VectorIndex::from_snapshot(snapshot_from_json(doc));
    if (provider.dim() != 0 && provider.dim() != index.dim()) {
      throw Error(Errc::DimensionMismatch, "snapshot dim " + std::to_string(index.dim()) +
                                               " != provider dim " + std::to_string(provider.dim()));
    }
    return index;
  }
  return build_index(exemplar_texts_from_json(doc), provider);
}

PipelineError::PipelineError(Errc code, const std::string& message, std::vector<TraceStep> trace)
    : Error(code, message), trace_(std::move(trace)) {}

Pipeline::Pipeline(PipelineConfig config, std::unique_ptr<EmbeddingProvider> provider,
                   VectorIndex index, Registry registry)
    : config_(std::move(config)),
      tau_(config_.tau),
      provider_(std::move(provider)),
      index_(std::move(index)),
      model_(CentroidModel::train(index_.list())),
      registry_(std::move(registry)) {
  for (const auto& [api_id, _] : model_.centroids()) {
    if (!registry_.contains(api_id)) {
      spdlog::warn("exemplar class '{}' has no registry entry", api_id);
    }
  }
}

std::unique_ptr<Pipeline> Pipeline::from_config(PipelineConfig config) {
  try {
    for (const auto* p : {&config.exemplars_path, &config.registry_path}) {
      if (!std::filesystem::exists(*p)) {
        throw Error(Errc::IoError, "'" + p->string() + "' does not exist");
      }
    }
    auto provider = make_provider(config.provider);
    auto index = load_exemplars(config.exemplars_path, *provider);
    auto registry = load_registry(config.registry_path);
    return std::make_unique<Pipeline>(std::move(config), std::move(provider), std::move(index),
                                      std::move(registry));
  } catch (const Error& e) {
    throw Error(Errc::FixtureLoadError, e.what());
  }
}

PipelineResponse Pipeline::handle_message(std::string_view text, const AttemptObserver& observer) const {
  PipelineResponse out;
  out.dry_run = config_.dry_run;

  auto start = Clock::now();
  const bool blank = text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
  out.trace.push_back({1, "receive", since(start),
                       blank ? "empty message" : "received " + std::to_string(text.size()) + " bytes"});
  log_step(out.trace.back());
  if (blank) throw PipelineError(Errc::EmptyText, "message is empty", out.trace);

  start = Clock::now();
  std::optional<EmbeddingVector> query;
  try {
    query = provider_->embed(text);
  } catch (const Error& e) {
    spdlog::error(json{{"step", 2}, {"name", "embed"}, {"error", e.what()}}.dump(
        -1, ' ', false, json::error_handler_t::replace));
    throw PipelineError(e.code(), e.what(), out.trace);
  }
  out.trace.push_back({2, "embed", since(start),
                       provider_->name() + " dim " + std::to_string(query->dim())});
  log_step(out.trace.back());

  start = Clock::now();
  auto g = gate(index_, *query, tau_);
  out.decision.gate_similarity = g.similarity;
  out.decision.threshold = tau_.value();
  out.trace.push_back({3, "gate", since(start), describe_scores(g.similarity, tau_.value(), g.best)});
  log_step(out.trace.back(), {{"gate_similarity", g.similarity}, {"passed", g.passed}});
  out.decision.best_exemplar = std::move(g.best);

  start = Clock::now();
  auto c = classify(model_, *query);
  const auto classify_time = since(start);
  out.decision.class_scores = std::move(c.class_scores);
  if (!g.passed) {
    out.decision.status = DecisionStatus::rejected;
    return out;
  }
  out.decision.status = DecisionStatus::accepted;
  out.decision.api_id = c.api_id;
  out.trace.push_back({4, "classify", classify_time,
                       "api_id " + c.api_id + " score " + std::to_string(out.decision.class_scores[c.api_id])});
  log_step(out.trace.back(), {{"api_id", c.api_id}});

  start = Clock::now();
  std::optional<ApiMetadata> metadata;
  try {
    metadata = registry_.get(c.api_id);
  } catch (const Error&) {
    spdlog::critical(json{{"step", 5}, {"name", "resolve"}, {"api_id", c.api_id},
                          {"error", "classifier produced an unregistered api_id"}}.dump());
    throw PipelineError(Errc::InternalMisconfiguration,
                        "api_id '" + c.api_id + "' has no registry entry", out.trace);
  }
  out.trace.push_back({5, "resolve", since(start),
                       std::to_string(metadata->transaction.size()) + " call(s) for " + c.api_id});
  log_step(out.trace.back());

  start = Clock::now();
  std::string summary;
  if (config_.dry_run) {
    summary = "dry run: " + std::to_string(metadata->transaction.size()) + " call(s) not executed";
  } else {
    out.report = execute_transaction(*metadata, config_.call_timeout, observer);
    summary = std::to_string(metadata->transaction.size()) + " call(s), " +
              std::string(to_string(out.report->overall));
  }
  out.trace.push_back({6, "execute", since(start), std::move(summary)});
  log_step(out.trace.back());
  return out;
}

json to_json(const TraceStep& step) {
  return {{"step", step.step},
          {"name", step.name},
          {"duration_ms", static_cast<double>(step.duration.count()) / 1000.0},
          {"summary", step.summary}};
}

json to_json(const PipelineResponse& r) {
  json trace = json::array();
  for (const auto& s : r.trace) trace.push_back(to_json(s));
  return {{"decision", to_json(r.decision)},
          {"report", r.report ? to_json(*r.report) : json(nullptr)},
          {"trace", std::move(trace)},
          {"dry_run", r.dry_run}};
}

}  // namespace spacectl
