#include "spacectl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spacectl::kernels {

namespace {

inline double score_row(const double* row, double row_norm, std::size_t dim, const double* query,
                        double query_norm) {
  double dot = 0.0;
  for (std::size_t j = 0; j < dim; ++j) dot += row[j] * query[j];
  return std::clamp(dot / (row_norm * query_norm), -1.0, 1.0);
}

}  // namespace

double row_norm(std::span<const double> row) {
  double sum = 0.0;
  for (double x : row) sum += x * x;
  return std::sqrt(sum);
}

void cosine_scores_serial(std::span<const double> rows, std::span<const double> norms,
                          std::size_t dim, std::span<const double> query, std::span<double> out) {
  const double qn = row_norm(query);
  const std::size_t n = norms.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = score_row(rows.data() + i * dim, norms[i], dim, query.data(), qn);
  }
}

void cosine_scores_parallel(std::span<const double> rows, std::span<const double> norms,
                            std::size_t dim, std::span<const double> query, std::span<double> out) {
  const double qn = row_norm(query);
  const auto n = static_cast<std::ptrdiff_t>(norms.size());
  const double* base = rows.data();
  const double* q = query.data();
  double* dst = out.data();
  const double* nrm = norms.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    dst[i] = score_row(base + static_cast<std::size_t>(i) * dim, nrm[i], dim, q, qn);
  }
}

void cosine_scores(Mode mode, std::span<const double> rows, std::span<const double> norms,
                   std::size_t dim, std::span<const double> query, std::span<double> out) {
  if (mode == Mode::automatic) {
    mode = norms.size() >= kParallelThreshold ? Mode::parallel : Mode::serial;
  }
  if (mode == Mode::parallel) {
    cosine_scores_parallel(rows, norms, dim, query, out);
  } else {
    cosine_scores_serial(rows, norms, dim, query, out);
  }
}

std::vector<std::size_t> top_k(std::span<const double> scores,
                               std::span<const std::string* const> keys, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return *keys[a] < *keys[b];
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  order.resize(k);
  return order;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace spacectl::kernels
