#include <doctest.h>

#include "spacectl/kernels.hpp"
#include "support.hpp"

using namespace spacectl;
using namespace spacectl::testing;

TEST_CASE("parallel scores equal the serial reference bit for bit") {
  std::mt19937_64 rng(11);
  for (std::size_t rows : {1u, 7u, 300u, 5000u}) {
    const std::size_t dim = 48;
    std::vector<double> matrix, norms;
    for (std::size_t i = 0; i < rows; ++i) {
      auto v = random_gaussian(rng, dim);
      norms.push_back(kernels::row_norm(v));
      matrix.insert(matrix.end(), v.begin(), v.end());
    }
    const auto q = random_gaussian(rng, dim);
    std::vector<double> serial(rows), parallel(rows);
    kernels::cosine_scores_serial(matrix, norms, dim, q, serial);
    kernels::cosine_scores_parallel(matrix, norms, dim, q, parallel);
    CHECK(serial == parallel);
    for (std::size_t i = 0; i < rows; ++i) {
      CHECK(serial[i] == oracle_cosine(std::span(matrix).subspan(i * dim, dim), q));
    }
  }
}

TEST_CASE("top_k orders by score then key") {
  const std::vector<double> scores{0.5, 0.9, 0.5, 0.1, 0.9};
  const std::vector<std::string> names{"c", "b", "a", "d", "e"};
  std::vector<const std::string*> keys;
  for (const auto& n : names) keys.push_back(&n);
  CHECK(kernels::top_k(scores, keys, 3) == std::vector<std::size_t>{1, 4, 2});
  CHECK(kernels::top_k(scores, keys, 10).size() == 5);
  CHECK(kernels::top_k(scores, keys, 0).empty());
}
