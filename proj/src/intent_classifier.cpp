#include "spacectl/intent_classifier.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "spacectl/error.hpp"

namespace spacectl {

using json = nlohmann::json;

Threshold::Threshold(double value) : value_(value) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw Error(Errc::InvalidThreshold, "tau must lie in (0, 1], got " + std::to_string(value));
  }
}

CentroidModel CentroidModel::train(std::span<const ExemplarRecord> exemplars) {
  if (exemplars.empty()) throw Error(Errc::EmptyTrainingSet, "no exemplars to train from");
  CentroidModel model;
  model.dim_ = exemplars.front().embedding.dim();

  std::map<std::string, std::vector<double>> sums;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    const auto& e = exemplars[i];
    if (e.api_id.empty()) {
      throw Error(Errc::SchemaError, "exemplar " + std::to_string(i) + " has no api_id", i);
    }
    if (e.embedding.dim() != model.dim_) {
      throw Error(Errc::DimensionMismatch, "exemplar " + std::to_string(i) + " has dim " +
                                               std::to_string(e.embedding.dim()), i);
    }
    auto& acc = sums[e.api_id];
    acc.resize(model.dim_, 0.0);
    const auto v = e.embedding.values();
    for (std::size_t j = 0; j < v.size(); ++j) acc[j] += v[j];
    ++model.trained_from_[e.api_id];
  }

  for (auto& [api_id, acc] : sums) {
    const auto n = static_cast<double>(model.trained_from_[api_id]);
    double sq = 0.0;
    for (double& x : acc) {
      x /= n;
      sq += x * x;
    }
    // Cancelling exemplars leave only roundoff behind.
    if (std::sqrt(sq) < 1e-12) {
      throw Error(Errc::DegenerateClass, "class '" + api_id + "' has a zero mean embedding");
    }
    model.centroids_.emplace(api_id, EmbeddingVector::normalized(std::move(acc)));
  }
  return model;
}

json CentroidModel::to_json() const {
  json classes = json::object();
  for (const auto& [api_id, c] : centroids_) {
    classes[api_id] = std::vector<double>(c.values().begin(), c.values().end());
  }
  return {{"dim", dim_}, {"classes", std::move(classes)}, {"trainedFrom", trained_from_}};
}

CentroidModel CentroidModel::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("classes") ||
      !doc.contains("trainedFrom")) {
    throw Error(Errc::SchemaError, "model needs dim, classes and trainedFrom");
  }
  CentroidModel model;
  model.dim_ = doc["dim"].get<std::size_t>();
  if (!doc["classes"].is_object() || doc["classes"].empty()) {
    throw Error(Errc::SchemaError, "model has no classes");
  }
  for (const auto& [api_id, values] : doc["classes"].items()) {
    auto v = values.get<std::vector<double>>();
    if (v.size() != model.dim_) throw Error(Errc::SchemaError, "class '" + api_id + "' has wrong dim");
    model.centroids_.emplace(api_id, EmbeddingVector::from_unit(std::move(v)));
    if (!doc["trainedFrom"].contains(api_id) || doc["trainedFrom"][api_id].get<std::size_t>() == 0) {
      throw Error(Errc::SchemaError, "class '" + api_id + "' has no trainedFrom count");
    }
    model.trained_from_[api_id] = doc["trainedFrom"][api_id].get<std::size_t>();
  }
  return model;
}

Classification classify(const CentroidModel& model, const EmbeddingVector& query) {
  if (query.dim() != model.dim()) {
    throw Error(Errc::DimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                             " != model dim " + std::to_string(model.dim()));
  }
  Classification out;
  double best = -2.0;
  // std::map iterates in ascending api_id order, so strict > keeps the smallest on ties.
  for (const auto& [api_id, centroid] : model.centroids()) {
    const double s = cosine_similarity(query, centroid);
    out.class_scores.emplace(api_id, s);
    if (s > best) {
      best = s;
      out.api_id = api_id;
    }
  }
  return out;
}

GateResult gate(const VectorIndex& index, const EmbeddingVector& query, Threshold tau) {
  auto top = index.nearest(query, 1);
  const double similarity = top.front().similarity;
  return {similarity >= tau.value(), similarity, std::move(top.front().record)};
}

IntentDecision decide(const VectorIndex& index, const CentroidModel& model,
                      const EmbeddingVector& query, Threshold tau) {
  if (index.size() == 0) throw Error(Errc::EmptyIndex, "the exemplar index is empty");
  const auto labels = index.label_counts();
  for (const auto& [api_id, _] : model.centroids()) {
    if (!labels.contains(api_id)) {
      throw Error(Errc::UniverseMismatch, "model class '" + api_id + "' has no indexed exemplar");
    }
  }

  auto g = gate(index, query, tau);
  auto c = classify(model, query);

  IntentDecision d;
  d.gate_similarity = g.similarity;
  d.threshold = tau.value();
  d.class_scores = std::move(c.class_scores);
  d.best_exemplar = std::move(g.best);
  if (g.passed) {
    d.status = DecisionStatus::accepted;
    d.api_id = std::move(c.api_id);
  }
  return d;
}

std::string_view to_string(DecisionStatus status) {
  return status == DecisionStatus::accepted ? "accepted" : "rejected";
}

json to_json(const IntentDecision& d) {
  json out = {{"status", to_string(d.status)},
              {"gate_similarity", d.gate_similarity},
              {"threshold", d.threshold},
              {"class_scores", d.class_scores}};
  out["api_id"] = d.api_id ? json(*d.api_id) : json(nullptr);
  if (d.best_exemplar) {
    out["matched_exemplar"] = {{"recordId", d.best_exemplar->record_id},
                               {"apiId", d.best_exemplar->api_id},
                               {"order", d.best_exemplar->order},
                               {"similarity", d.gate_similarity}};
  }
  return out;
}

}  // namespace spacectl
