#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spacectl {

// Unit-length, finite, fixed-dimension vector. The only way to obtain one is
// through a factory that enforces those invariants.
class EmbeddingVector {
 public:
  // Scales `values` to unit L2 norm. Throws ZeroVector or SchemaError (non-finite).
  static EmbeddingVector normalized(std::vector<double> values);

  // Adopts already-normalized values bit-for-bit (used when loading snapshots).
  // Throws SchemaError if any value is non-finite or the norm is off by more
  // than 1e-9.
  static EmbeddingVector from_unit(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = kFnvOffsetBasis;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

// Lowercased ASCII alphanumeric runs; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Pre-normalization accumulator of the local hash embedder: weight 1.0 per
// token at fnv1a64(token) % dim, weight 0.5 per character trigram at
// fnv1a64(trigram) % dim.
std::vector<double> local_hash_accumulate(std::string_view text, std::size_t dim);

inline constexpr std::size_t kMinLocalHashDim = 16;
inline constexpr std::size_t kDefaultLocalHashDim = 256;

EmbeddingVector local_hash_embed(std::string_view text, std::size_t dim);

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

enum class ProviderKind { remote, local_hash };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::local_hash;
  std::string remote_base_url = "https://api.openai.com/v1";
  std::string remote_model_name = "text-embedding-3-small";
  std::string api_key_env_name = "EMBEDDINGS_API_KEY";
  std::optional<std::size_t> dim;
  std::chrono::milliseconds timeout{10'000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{200};
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual EmbeddingVector embed(std::string_view text) const;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;

  // 0 when not yet known (remote provider before its first response).
  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
};

class LocalHashProvider final : public EmbeddingProvider {
 public:
  explicit LocalHashProvider(std::size_t dim = kDefaultLocalHashDim);

  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "local_hash"; }

 private:
  std::size_t dim_;
};

// Speaks the common embeddings wire shape:
//   POST {base}/embeddings {"model": m, "input": [texts]}
//   -> {"data": [{"index": i, "embedding": [...]}, ...]}
// Retries timeouts, network failures and 5xx with exponential backoff.
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(ProviderConfig config);

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
  std::size_t dim() const override;
  std::string name() const override { return config_.remote_model_name; }

 private:
  ProviderConfig config_;
  std::string api_key_;
  mutable std::atomic<std::size_t> learned_dim_{0};
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

EmbeddingVector embed_text(std::string_view text, const ProviderConfig& config);
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const ProviderConfig& config);

// Throws EmptyText (with index) for the first blank entry.
void require_non_blank(std::span<const std::string> texts);

}  // namespace spacectl
