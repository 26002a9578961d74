#include "spacectl/api_registry.hpp"

#include <mutex>
#include <nlohmann/json.hpp>

#include "spacectl/error.hpp"
#include "spacectl/url.hpp"
#include "spacectl/vector_index.hpp"

namespace spacectl {

using json = nlohmann::json;

std::string_view to_string(HttpMethod method) {
  switch (method) {
    case HttpMethod::GET: return "GET";
    case HttpMethod::PUT: return "PUT";
    case HttpMethod::POST: return "POST";
    case HttpMethod::DELETE: return "DELETE";
  }
  return "GET";
}

std::optional<HttpMethod> parse_method(std::string_view text) {
  if (text == "GET") return HttpMethod::GET;
  if (text == "PUT") return HttpMethod::PUT;
  if (text == "POST") return HttpMethod::POST;
  if (text == "DELETE") return HttpMethod::DELETE;
  return std::nullopt;
}

namespace {

void check_call_values(const std::string& prefix, const std::string& endpoint,
                       const std::string& body, std::vector<Violation>& out) {
  if (!parse_absolute_url(endpoint)) {
    out.push_back({prefix + ".endpoint", "'" + endpoint + "' is not an absolute http(s) URL"});
  }
  if (!body.empty() && !json::accept(body)) {
    out.push_back({prefix + ".body", "body is not a JSON document"});
  }
}

}  // namespace

std::vector<Violation> validate(const ApiMetadata& metadata) {
  std::vector<Violation> out;
  if (metadata.api_id.empty()) out.push_back({"api_id", "api_id is empty"});
  if (metadata.transaction.empty()) out.push_back({"transaction", "transaction has no calls"});
  for (std::size_t i = 0; i < metadata.transaction.size(); ++i) {
    const auto& call = metadata.transaction[i];
    check_call_values("transaction[" + std::to_string(i) + "]", call.endpoint, call.body, out);
  }
  return out;
}

std::vector<Violation> validate_json(const json& entry) {
  std::vector<Violation> out;
  if (!entry.is_object()) {
    out.push_back({"", "entry is not an object"});
    return out;
  }
  if (!entry.contains("api_id") || !entry["api_id"].is_string()) {
    out.push_back({"api_id", "missing or not a string"});
  } else if (entry["api_id"].get<std::string>().empty()) {
    out.push_back({"api_id", "api_id is empty"});
  }
  if (!entry.contains("transaction") || !entry["transaction"].is_array()) {
    out.push_back({"transaction", "missing or not an array"});
    return out;
  }
  const auto& tx = entry["transaction"];
  if (tx.empty()) out.push_back({"transaction", "transaction has no calls"});
  for (std::size_t i = 0; i < tx.size(); ++i) {
    const auto prefix = "transaction[" + std::to_string(i) + "]";
    const auto& call = tx[i];
    if (!call.is_object()) {
      out.push_back({prefix, "call is not an object"});
      continue;
    }
    for (const char* field : {"method", "endpoint", "body"}) {
      if (!call.contains(field) || !call[field].is_string()) {
        out.push_back({prefix + "." + field, "missing or not a string"});
      }
    }
    if (call.contains("method") && call["method"].is_string() &&
        !parse_method(call["method"].get<std::string>())) {
      out.push_back({prefix + ".method", "'" + call["method"].get<std::string>() +
                                             "' is not one of GET, PUT, POST, DELETE"});
    }
    if (call.contains("endpoint") && call["endpoint"].is_string() && call.contains("body") &&
        call["body"].is_string()) {
      check_call_values(prefix, call["endpoint"].get<std::string>(),
                        call["body"].get<std::string>(), out);
    }
  }
  return out;
}

ApiMetadata metadata_from_json(const json& entry) {
  auto violations = validate_json(entry);
  if (!violations.empty()) {
    throw Error(Errc::ValidationError, violations.front().field + ": " + violations.front().message);
  }
  ApiMetadata m;
  m.api_id = entry["api_id"].get<std::string>();
  for (const auto& call : entry["transaction"]) {
    m.transaction.push_back({*parse_method(call["method"].get<std::string>()),
                             call["endpoint"].get<std::string>(), call["body"].get<std::string>()});
  }
  return m;
}

json to_json(const ApiMetadata& metadata) {
  json tx = json::array();
  for (const auto& call : metadata.transaction) {
    tx.push_back({{"method", to_string(call.method)},
                  {"endpoint", call.endpoint},
                  {"body", call.body}});
  }
  return {{"api_id", metadata.api_id}, {"transaction", std::move(tx)}};
}

Registry::Registry(Registry&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  entries_ = std::move(other.entries_);
}

Registry& Registry::operator=(Registry&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = std::move(other.entries_);
  }
  return *this;
}

void Registry::register_api(ApiMetadata metadata) {
  if (auto violations = validate(metadata); !violations.empty()) {
    throw Error(Errc::ValidationError, violations.front().field + ": " + violations.front().message);
  }
  std::unique_lock lock(mutex_);
  if (entries_.contains(metadata.api_id)) {
    throw Error(Errc::DuplicateApiId, "api_id '" + metadata.api_id + "' already registered");
  }
  auto key = metadata.api_id;
  entries_.emplace(std::move(key), std::move(metadata));
}

ApiMetadata Registry::get(std::string_view api_id) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(api_id);
  if (it == entries_.end()) throw Error(Errc::NotFound, "no API registered as '" + std::string(api_id) + "'");
  return it->second;
}

ApiMetadata Registry::remove(std::string_view api_id) {
  std::unique_lock lock(mutex_);
  auto it = entries_.find(api_id);
  if (it == entries_.end()) throw Error(Errc::NotFound, "no API registered as '" + std::string(api_id) + "'");
  auto out = std::move(it->second);
  entries_.erase(it);
  return out;
}

bool Registry::contains(std::string_view api_id) const {
  std::shared_lock lock(mutex_);
  return entries_.find(api_id) != entries_.end();
}

std::vector<ApiMetadata> Registry::list() const {
  std::shared_lock lock(mutex_);
  std::vector<ApiMetadata> out;
  out.reserve(entries_.size());
  for (const auto& [_, m] : entries_) out.push_back(m);
  return out;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

Registry registry_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(Errc::SchemaError, "registry must be a JSON array");
  Registry registry;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto violations = validate_json(doc[i]);
    if (!violations.empty()) {
      throw Error(Errc::SchemaError, "entry " + std::to_string(i) + ", " + violations.front().field +
                                         ": " + violations.front().message, i);
    }
    try {
      registry.register_api(metadata_from_json(doc[i]));
    } catch (const Error& e) {
      throw Error(Errc::SchemaError, "entry " + std::to_string(i) + ", api_id: " + e.what(), i);
    }
  }
  return registry;
}

json registry_to_json(const Registry& registry) {
  json out = json::array();
  for (const auto& m : registry.list()) out.push_back(to_json(m));
  return out;
}

Registry load_registry(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
  return registry_from_json(doc);
}

void save_registry(const Registry& registry, const std::filesystem::path& path) {
  write_text_file(path, registry_to_json(registry).dump(2) + "\n");
}

}  // namespace spacectl
