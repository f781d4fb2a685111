#pragma once

#include <cstddef>
#include <vector>

#include "mvembed/dataset.hpp"

namespace mvembed {

/// Exact k-nearest-neighbor lists, row-major: entry (i, j) is the j-th
/// nearest neighbor of sample i. Rows are sorted by ascending distance with
/// ties going to the lower sample index; a sample never lists itself.
struct NeighborGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t index(std::size_t i, std::size_t j) const { return indices[i * k + j]; }
  double distance(std::size_t i, std::size_t j) const { return distances[i * k + j]; }
};

/// Brute-force Euclidean kNN over the columns of `samples` (D x n).
/// Throws KTooLarge when k >= n and InvalidArgument when k == 0.
NeighborGraph knn(const Eigen::MatrixXd& samples, std::size_t k);

inline NeighborGraph knn(const ViewMatrix& view, std::size_t k) { return knn(view.data, k); }

}  // namespace mvembed
