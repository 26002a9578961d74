#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Dense cosine scoring over a row-major matrix of exemplar embeddings.
// The serial kernel is the reference; the OpenMP kernel must agree with it
// bit-for-bit since each row is still reduced by a single thread in index order.
namespace spacectl::kernels {

enum class Mode { automatic, serial, parallel };

// Rows at or above this count use the parallel kernel in automatic mode.
inline constexpr std::size_t kParallelThreshold = 2048;

// norms[i] must be sqrt(sum(rows[i]^2)) computed in index order.
void cosine_scores_serial(std::span<const double> rows, std::span<const double> norms,
                          std::size_t dim, std::span<const double> query, std::span<double> out);

void cosine_scores_parallel(std::span<const double> rows, std::span<const double> norms,
                            std::size_t dim, std::span<const double> query, std::span<double> out);

void cosine_scores(Mode mode, std::span<const double> rows, std::span<const double> norms,
                   std::size_t dim, std::span<const double> query, std::span<double> out);

double row_norm(std::span<const double> row);

// Positions of the k best scores: descending score, ties by ascending key.
std::vector<std::size_t> top_k(std::span<const double> scores,
                               std::span<const std::string* const> keys, std::size_t k);

int max_threads();

}  // namespace spacectl::kernels
