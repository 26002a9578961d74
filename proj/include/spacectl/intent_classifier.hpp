#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "spacectl/embedding.hpp"
#include "spacectl/vector_index.hpp"

namespace spacectl {

// Relevance threshold for the similarity gate, always in (0, 1].
class Threshold {
 public:
  explicit Threshold(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

inline constexpr double kDefaultRemoteThreshold = 0.55;

// Nearest-centroid model. Immutable once trained.
class CentroidModel {
 public:
  static CentroidModel train(std::span<const ExemplarRecord> exemplars);

  std::size_t dim() const noexcept { return dim_; }
  const std::map<std::string, EmbeddingVector>& centroids() const noexcept { return centroids_; }
  const std::map<std::string, std::size_t>& trained_from() const noexcept { return trained_from_; }

  nlohmann::json to_json() const;
  static CentroidModel from_json(const nlohmann::json& doc);

 private:
  CentroidModel() = default;
  std::size_t dim_ = 0;
  std::map<std::string, EmbeddingVector> centroids_;
  std::map<std::string, std::size_t> trained_from_;
};

struct Classification {
  std::string api_id;
  std::map<std::string, double> class_scores;
};

// Highest cosine to a centroid; ties go to the lexicographically smallest api_id.
Classification classify(const CentroidModel& model, const EmbeddingVector& query);

struct GateResult {
  bool passed = false;
  double similarity = 0.0;
  ExemplarRecord best;
};

// Passes when the best exemplar similarity is >= tau.
GateResult gate(const VectorIndex& index, const EmbeddingVector& query, Threshold tau);

enum class DecisionStatus { accepted, rejected };

struct IntentDecision {
  DecisionStatus status = DecisionStatus::rejected;
  std::optional<std::string> api_id;  // present iff accepted
  double gate_similarity = 0.0;
  std::map<std::string, double> class_scores;
  double threshold = 0.0;
  std::optional<ExemplarRecord> best_exemplar;
};

IntentDecision decide(const VectorIndex& index, const CentroidModel& model,
                      const EmbeddingVector& query, Threshold tau);

std::string_view to_string(DecisionStatus status);
nlohmann::json to_json(const IntentDecision& decision);

}  // namespace spacectl
