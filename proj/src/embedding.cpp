#include "spacectl/embedding.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "spacectl/error.hpp"
#include "spacectl/url.hpp"

namespace spacectl {

namespace {

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void require_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(Errc::SchemaError, "non-finite embedding component at " + std::to_string(i));
    }
  }
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  require_finite(values);
  const double norm = l2_norm(values);
  if (norm == 0.0) throw Error(Errc::ZeroVector, "cannot normalize a zero vector");
  for (double& x : values) x /= norm;
  return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::SchemaError, "embedding has no components");
  require_finite(values);
  const double norm = l2_norm(values);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw Error(Errc::SchemaError, "embedding is not unit-normalized (norm " +
                                       std::to_string(norm) + ")");
  }
  return EmbeddingVector(std::move(values));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_ascii_alnum(c)) {
      current.push_back(ascii_lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> local_hash_accumulate(std::string_view text, std::size_t dim) {
  if (dim < kMinLocalHashDim) {
    throw Error(Errc::ConfigError, "local hash dim must be >= " + std::to_string(kMinLocalHashDim));
  }
  std::vector<double> acc(dim, 0.0);
  for (const auto& token : tokenize(text)) {
    acc[fnv1a64(token) % dim] += 1.0;
    for (std::size_t i = 0; i + 3 <= token.size(); ++i) {
      acc[fnv1a64(std::string_view(token).substr(i, 3)) % dim] += 0.5;
    }
  }
  return acc;
}

EmbeddingVector local_hash_embed(std::string_view text, std::size_t dim) {
  if (is_blank(text)) throw Error(Errc::EmptyText, "text is empty after trimming");
  auto acc = local_hash_accumulate(text, dim);
  // Blank-after-tokenizing input (pure punctuation) lands here.
  if (std::all_of(acc.begin(), acc.end(), [](double x) { return x == 0.0; })) {
    throw Error(Errc::ZeroVector, "text has no alphanumeric tokens");
  }
  return EmbeddingVector::normalized(std::move(acc));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(Errc::ZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine_similarity(a.values(), b.values());
}

void require_non_blank(std::span<const std::string> texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (is_blank(texts[i])) {
      throw Error(Errc::EmptyText, "text at index " + std::to_string(i) + " is empty", i);
    }
  }
}

EmbeddingVector EmbeddingProvider::embed(std::string_view text) const {
  const std::string owned(text);
  auto out = embed_batch(std::span<const std::string>(&owned, 1));
  return std::move(out.front());
}

LocalHashProvider::LocalHashProvider(std::size_t dim) : dim_(dim) {
  if (dim_ < kMinLocalHashDim) {
    throw Error(Errc::ConfigError, "local hash dim must be >= " + std::to_string(kMinLocalHashDim));
  }
}

EmbeddingVector LocalHashProvider::embed(std::string_view text) const {
  return local_hash_embed(text, dim_);
}

std::vector<EmbeddingVector> LocalHashProvider::embed_batch(
    std::span<const std::string> texts) const {
  require_non_blank(texts);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(local_hash_embed(texts[i], dim_));
    } catch (const Error& e) {
      throw Error(e.code(), "at index " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

RemoteProvider::RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
  if (!parse_absolute_url(config_.remote_base_url)) {
    throw Error(Errc::ConfigError, "remote_base_url is not an absolute http(s) URL");
  }
  if (const char* key = std::getenv(config_.api_key_env_name.c_str())) api_key_ = key;
  if (config_.dim) learned_dim_ = *config_.dim;
}

std::size_t RemoteProvider::dim() const { return learned_dim_.load(); }

std::vector<EmbeddingVector> RemoteProvider::embed_batch(
    std::span<const std::string> texts) const {
  require_non_blank(texts);
  if (texts.empty()) return {};

  const auto base = *parse_absolute_url(config_.remote_base_url);
  std::string path = base.target;
  if (path.back() == '/') path.pop_back();
  path += "/embeddings";

  nlohmann::json request = {{"model", config_.remote_model_name},
                            {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string payload = request.dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - timeout_s);

  std::string last_failure;
  Errc last_code = Errc::ProviderUnreachable;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.backoff_base * (1LL << (attempt - 1)));
    }
    httplib::Client client(base.origin());
    client.set_connection_timeout(timeout_s.count(), timeout_us.count());
    client.set_read_timeout(timeout_s.count(), timeout_us.count());
    client.set_write_timeout(timeout_s.count(), timeout_us.count());

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_code = Errc::ProviderUnreachable;
      last_failure = httplib::to_string(res.error());
      spdlog::warn("embedding request attempt {} failed: {}", attempt + 1, last_failure);
      continue;
    }
    if (res->status >= 500) {
      last_code = Errc::ProviderRejected;
      last_failure = "HTTP " + std::to_string(res->status) + ": " + res->body;
      spdlog::warn("embedding request attempt {} got HTTP {}", attempt + 1, res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(Errc::ProviderRejected, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ProviderRejected, std::string("unparseable response: ") + e.what());
    }
    if (!body.contains("data") || !body["data"].is_array() || body["data"].size() != texts.size()) {
      throw Error(Errc::ProviderRejected, "response has no data array of matching length");
    }

    std::vector<std::optional<EmbeddingVector>> slots(texts.size());
    for (std::size_t i = 0; i < body["data"].size(); ++i) {
      const auto& item = body["data"][i];
      const std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : i;
      if (slot >= slots.size() || slots[slot] || !item.contains("embedding")) {
        throw Error(Errc::ProviderRejected, "malformed data item " + std::to_string(i));
      }
      auto values = item["embedding"].get<std::vector<double>>();
      std::size_t expected = learned_dim_.load();
      if (expected == 0) {
        learned_dim_.compare_exchange_strong(expected, values.size());
        expected = learned_dim_.load();
      }
      if (values.size() != expected) {
        throw Error(Errc::DimensionMismatch,
                    "provider returned dim " + std::to_string(values.size()) + ", expected " +
                        std::to_string(expected),
                    slot);
      }
      slots[slot] = EmbeddingVector::normalized(std::move(values));
    }

    std::vector<EmbeddingVector> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
  }
  throw Error(last_code, "after " + std::to_string(config_.max_retries + 1) +
                             " attempts: " + last_failure);
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
  if (config.kind == ProviderKind::local_hash) {
    if (!config.dim) throw Error(Errc::ConfigError, "local_hash provider requires an explicit dim");
    return std::make_unique<LocalHashProvider>(*config.dim);
  }
  return std::make_unique<RemoteProvider>(config);
}

EmbeddingVector embed_text(std::string_view text, const ProviderConfig& config) {
  return make_provider(config)->embed(text);
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const ProviderConfig& config) {
  return make_provider(config)->embed_batch(texts);
}

}  // namespace spacectl
