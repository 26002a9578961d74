#include "spacectl/vector_index.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>

#include "spacectl/error.hpp"

namespace spacectl {

using json = nlohmann::json;

VectorIndex::VectorIndex() : created_at_(std::chrono::system_clock::now()) {}

VectorIndex::VectorIndex(std::size_t dim) : VectorIndex() { dim_ = dim; }

VectorIndex::VectorIndex(VectorIndex&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  dim_ = other.dim_;
  created_at_ = other.created_at_;
  records_ = std::move(other.records_);
  rows_ = std::move(other.rows_);
  norms_ = std::move(other.norms_);
  position_ = std::move(other.position_);
  labels_ = std::move(other.labels_);
}

VectorIndex& VectorIndex::operator=(VectorIndex&& other) noexcept {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  dim_ = other.dim_;
  created_at_ = other.created_at_;
  records_ = std::move(other.records_);
  rows_ = std::move(other.rows_);
  norms_ = std::move(other.norms_);
  position_ = std::move(other.position_);
  labels_ = std::move(other.labels_);
  return *this;
}

std::string VectorIndex::insert(ExemplarRecord record) {
  if (record.record_id.empty()) throw Error(Errc::SchemaError, "record_id is empty");
  if (record.api_id.empty()) throw Error(Errc::SchemaError, "apiId is empty");
  if (record.order.empty()) throw Error(Errc::SchemaError, "order is empty");

  std::unique_lock lock(mutex_);
  if (dim_ == 0) dim_ = record.embedding.dim();
  if (record.embedding.dim() != dim_) {
    throw Error(Errc::DimensionMismatch, "record dim " + std::to_string(record.embedding.dim()) +
                                             " != index dim " + std::to_string(dim_));
  }
  if (position_.contains(record.record_id)) {
    throw Error(Errc::DuplicateId, "record_id '" + record.record_id + "' already present");
  }
  const auto values = record.embedding.values();
  rows_.insert(rows_.end(), values.begin(), values.end());
  norms_.push_back(kernels::row_norm(values));
  position_.emplace(record.record_id, records_.size());
  ++labels_[record.api_id];
  auto id = record.record_id;
  records_.push_back(std::move(record));
  return id;
}

ExemplarRecord VectorIndex::remove(std::string_view record_id) {
  std::unique_lock lock(mutex_);
  auto it = position_.find(std::string(record_id));
  if (it == position_.end()) {
    throw Error(Errc::NotFound, "record_id '" + std::string(record_id) + "' not in index");
  }
  const std::size_t pos = it->second;
  position_.erase(it);

  ExemplarRecord removed = std::move(records_[pos]);
  records_.erase(records_.begin() + static_cast<std::ptrdiff_t>(pos));
  const auto row_begin = rows_.begin() + static_cast<std::ptrdiff_t>(pos * dim_);
  rows_.erase(row_begin, row_begin + static_cast<std::ptrdiff_t>(dim_));
  norms_.erase(norms_.begin() + static_cast<std::ptrdiff_t>(pos));
  for (std::size_t i = pos; i < records_.size(); ++i) position_[records_[i].record_id] = i;
  if (--labels_[removed.api_id] == 0) labels_.erase(removed.api_id);
  return removed;
}

std::optional<ExemplarRecord> VectorIndex::get(std::string_view record_id) const {
  std::shared_lock lock(mutex_);
  auto it = position_.find(std::string(record_id));
  if (it == position_.end()) return std::nullopt;
  return records_[it->second];
}

std::vector<ExemplarRecord> VectorIndex::list() const {
  std::shared_lock lock(mutex_);
  return records_;
}

std::vector<Neighbor> VectorIndex::nearest(const EmbeddingVector& query, std::size_t k,
                                           kernels::Mode mode) const {
  std::shared_lock lock(mutex_);
  if (records_.empty()) throw Error(Errc::EmptyIndex, "nearest on an empty index");
  if (query.dim() != dim_) {
    throw Error(Errc::DimensionMismatch, "query dim " + std::to_string(query.dim()) +
                                             " != index dim " + std::to_string(dim_));
  }
  std::vector<double> scores(records_.size());
  kernels::cosine_scores(mode, rows_, norms_, dim_, query.values(), scores);

  std::vector<const std::string*> keys;
  keys.reserve(records_.size());
  for (const auto& r : records_) keys.push_back(&r.record_id);

  std::vector<Neighbor> out;
  for (std::size_t pos : kernels::top_k(scores, keys, k)) {
    out.push_back({records_[pos], scores[pos]});
  }
  return out;
}

std::size_t VectorIndex::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::size_t VectorIndex::dim() const {
  std::shared_lock lock(mutex_);
  return dim_;
}

std::map<std::string, std::size_t> VectorIndex::label_counts() const {
  std::shared_lock lock(mutex_);
  return labels_;
}

IndexSnapshot VectorIndex::snapshot() const {
  std::shared_lock lock(mutex_);
  return {dim_, records_, created_at_};
}

VectorIndex VectorIndex::from_snapshot(IndexSnapshot snapshot) {
  VectorIndex index(snapshot.dim);
  index.created_at_ = snapshot.created_at;
  for (auto& r : snapshot.records) index.insert(std::move(r));
  return index;
}

std::string format_rfc3339(std::chrono::system_clock::time_point t) {
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(t);
  const std::time_t tt = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::chrono::system_clock::time_point parse_rfc3339(std::string_view text) {
  std::tm tm{};
  std::istringstream is{std::string(text)};
  is >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (is.fail()) throw Error(Errc::SchemaError, "created_at is not an RFC 3339 timestamp");
  // Fractional seconds are dropped; only UTC offsets of Z are produced by save.
  return std::chrono::system_clock::from_time_t(timegm(&tm));
}

json snapshot_to_json(const IndexSnapshot& snapshot) {
  json records = json::array();
  for (const auto& r : snapshot.records) {
    const auto v = r.embedding.values();
    records.push_back({{"recordId", r.record_id},
                       {"apiId", r.api_id},
                       {"order", r.order},
                       {"embedding", std::vector<double>(v.begin(), v.end())}});
  }
  return {{"dim", snapshot.dim},
          {"created_at", format_rfc3339(snapshot.created_at)},
          {"records", std::move(records)}};
}

namespace {

const json& require_field(const json& obj, const char* field, json::value_t type,
                          const std::string& where) {
  if (!obj.is_object() || !obj.contains(field)) {
    throw Error(Errc::SchemaError, where + ": missing field '" + field + "'");
  }
  const auto& value = obj[field];
  const bool ok = type == json::value_t::number_unsigned ? value.is_number_unsigned()
                                                         : value.type() == type;
  if (!ok) throw Error(Errc::SchemaError, where + ": field '" + field + "' has the wrong type");
  return value;
}

}  // namespace

IndexSnapshot snapshot_from_json(const json& doc) {
  IndexSnapshot snap;
  snap.dim = require_field(doc, "dim", json::value_t::number_unsigned, "snapshot").get<std::size_t>();
  snap.created_at =
      parse_rfc3339(require_field(doc, "created_at", json::value_t::string, "snapshot").get<std::string>());
  const auto& records = require_field(doc, "records", json::value_t::array, "snapshot");
  if (snap.dim == 0) throw Error(Errc::SchemaError, "snapshot: dim must be positive");

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto where = "records[" + std::to_string(i) + "]";
    const auto& r = records[i];
    auto id = require_field(r, "recordId", json::value_t::string, where).get<std::string>();
    auto api = require_field(r, "apiId", json::value_t::string, where).get<std::string>();
    auto order = require_field(r, "order", json::value_t::string, where).get<std::string>();
    const auto& emb = require_field(r, "embedding", json::value_t::array, where);
    std::vector<double> values;
    values.reserve(emb.size());
    for (const auto& x : emb) {
      if (!x.is_number()) throw Error(Errc::SchemaError, where + ": embedding holds a non-number");
      values.push_back(x.get<double>());
    }
    if (values.size() != snap.dim) {
      throw Error(Errc::SchemaError, where + ": embedding dim " + std::to_string(values.size()) +
                                         " differs from snapshot dim " + std::to_string(snap.dim));
    }
    try {
      snap.records.push_back({std::move(id), std::move(api), std::move(order),
                              EmbeddingVector::from_unit(std::move(values))});
    } catch (const Error& e) {
      throw Error(Errc::SchemaError, where + ": " + e.what());
    }
  }
  return snap;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(Errc::IoError, "failed reading '" + path.string() + "'");
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoError, "failed writing '" + path.string() + "'");
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
  write_text_file(path, snapshot_to_json(index.snapshot()).dump(2) + "\n");
}

VectorIndex load_index(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, path.string() + ": " + e.what());
  }
  auto snap = snapshot_from_json(doc);
  try {
    return VectorIndex::from_snapshot(std::move(snap));
  } catch (const Error& e) {
    if (e.code() == Errc::DuplicateId) throw Error(Errc::SchemaError, e.what());
    throw;
  }
}

}  // namespace spacectl
