// Serial vs OpenMP cosine scoring over exemplar matrices of growing size.
//   bench_nearest [dim] [queries]

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <random>
#include <vector>

#include "spacectl/kernels.hpp"
#include "spacectl/vector_index.hpp"

using namespace spacectl;

namespace {

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  const auto unit = EmbeddingVector::normalized(std::move(v));
  return {unit.values().begin(), unit.values().end()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t dim = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 256;
  const std::size_t queries = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 50;
  std::mt19937_64 rng(42);

  std::cout << "threads " << kernels::max_threads() << ", dim " << dim << ", " << queries
            << " queries\n";
  std::cout << std::setw(10) << "rows" << std::setw(14) << "serial ms" << std::setw(14)
            << "parallel ms" << std::setw(10) << "speedup" << "\n";

  for (std::size_t rows : {1'000u, 10'000u, 50'000u, 200'000u}) {
    std::vector<double> matrix;
    std::vector<double> norms;
    matrix.reserve(rows * dim);
    for (std::size_t i = 0; i < rows; ++i) {
      auto v = random_unit(rng, dim);
      norms.push_back(kernels::row_norm(v));
      matrix.insert(matrix.end(), v.begin(), v.end());
    }
    std::vector<std::vector<double>> qs;
    for (std::size_t q = 0; q < queries; ++q) qs.push_back(random_unit(rng, dim));

    std::vector<double> out(rows);
    double checksum = 0.0;
    auto time = [&](auto kernel) {
      const auto t0 = std::chrono::steady_clock::now();
      for (const auto& q : qs) {
        kernel(matrix, norms, dim, q, out);
        checksum += out[rows / 2];
      }
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    const double serial = time(kernels::cosine_scores_serial);
    const double parallel = time(kernels::cosine_scores_parallel);
    std::cout << std::setw(10) << rows << std::setw(14) << std::fixed << std::setprecision(2) << serial
              << std::setw(14) << parallel << std::setw(10) << serial / parallel << "\n";
  }
  return 0;
}
