#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spacectl/embedding.hpp"
#include "spacectl/kernels.hpp"

namespace spacectl {

// One stored example utterance. On disk the fields are named
// recordId / apiId / order / embedding.
struct ExemplarRecord {
  std::string record_id;
  std::string api_id;
  std::string order;  // the example command text
  EmbeddingVector embedding;

  friend bool operator==(const ExemplarRecord&, const ExemplarRecord&) = default;
};

struct Neighbor {
  ExemplarRecord record;
  double similarity = 0.0;
};

struct IndexSnapshot {
  std::size_t dim = 0;
  std::vector<ExemplarRecord> records;
  std::chrono::system_clock::time_point created_at;
};

// Exact cosine kNN over a flat row-major embedding matrix. Many concurrent
// readers or one writer; a query never observes a half-applied mutation.
class VectorIndex {
 public:
  VectorIndex();
  explicit VectorIndex(std::size_t dim);
  VectorIndex(VectorIndex&& other) noexcept;
  VectorIndex& operator=(VectorIndex&& other) noexcept;
  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  // The first insert into a dimensionless index fixes its dim.
  std::string insert(ExemplarRecord record);
  ExemplarRecord remove(std::string_view record_id);

  std::optional<ExemplarRecord> get(std::string_view record_id) const;
  std::vector<ExemplarRecord> list() const;

  std::vector<Neighbor> nearest(const EmbeddingVector& query, std::size_t k,
                                kernels::Mode mode = kernels::Mode::automatic) const;

  std::size_t size() const;
  std::size_t dim() const;  // 0 until fixed
  // Exemplar count per api_id.
  std::map<std::string, std::size_t> label_counts() const;

  IndexSnapshot snapshot() const;
  static VectorIndex from_snapshot(IndexSnapshot snapshot);

 private:
  mutable std::shared_mutex mutex_;
  std::size_t dim_ = 0;
  std::chrono::system_clock::time_point created_at_;
  std::vector<ExemplarRecord> records_;
  std::vector<double> rows_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> position_;
  std::map<std::string, std::size_t> labels_;
};

std::string format_rfc3339(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point parse_rfc3339(std::string_view text);

nlohmann::json snapshot_to_json(const IndexSnapshot& snapshot);
IndexSnapshot snapshot_from_json(const nlohmann::json& doc);

void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

// Shared file helpers; both throw IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace spacectl
