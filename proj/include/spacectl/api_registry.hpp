#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace spacectl {

enum class HttpMethod { GET, PUT, POST, DELETE };

std::string_view to_string(HttpMethod method);
std::optional<HttpMethod> parse_method(std::string_view text);

struct ApiCall {
  HttpMethod method = HttpMethod::GET;
  std::string endpoint;
  std::string body;  // raw JSON text, forwarded byte-for-byte; may be empty

  friend bool operator==(const ApiCall&, const ApiCall&) = default;
};

// A single-call API is a transaction of length one.
struct ApiMetadata {
  std::string api_id;
  std::vector<ApiCall> transaction;

  friend bool operator==(const ApiMetadata&, const ApiMetadata&) = default;
};

struct Violation {
  std::string field;  // e.g. "transaction[1].body"
  std::string message;
};

std::vector<Violation> validate(const ApiMetadata& metadata);

// Validates the JSON shape as well as the decoded values, so an unknown verb
// such as "FETCH" is reported rather than rejected during decoding.
std::vector<Violation> validate_json(const nlohmann::json& entry);

ApiMetadata metadata_from_json(const nlohmann::json& entry);
nlohmann::json to_json(const ApiMetadata& metadata);

class Registry {
 public:
  Registry() = default;
  Registry(Registry&& other) noexcept;
  Registry& operator=(Registry&& other) noexcept;

  void register_api(ApiMetadata metadata);
  ApiMetadata get(std::string_view api_id) const;
  ApiMetadata remove(std::string_view api_id);
  bool contains(std::string_view api_id) const;
  std::vector<ApiMetadata> list() const;  // ascending api_id
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, ApiMetadata, std::less<>> entries_;
};

// The file is a JSON array of {"api_id", "transaction": [{"method", "endpoint", "body"}]}.
Registry registry_from_json(const nlohmann::json& doc);
nlohmann::json registry_to_json(const Registry& registry);

Registry load_registry(const std::filesystem::path& path);
void save_registry(const Registry& registry, const std::filesystem::path& path);

}  // namespace spacectl
