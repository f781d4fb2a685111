#include "mvembed/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvembed/error.hpp"
#include "mvembed/kernels.hpp"
#include "mvembed/parallel.hpp"

namespace mvembed {

NeighborGraph knn(const Eigen::MatrixXd& samples, std::size_t k) {
  const std::size_t n = static_cast<std::size_t>(samples.cols());
  const std::size_t dim = static_cast<std::size_t>(samples.rows());
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k >= n) {
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " needs more than " + std::to_string(n) + " samples");
  }

  NeighborGraph graph{n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
  auto column = [&](std::size_t i) { return std::span<const double>(samples.col(i).data(), dim); };

  parallel_for(n, [&](std::size_t i) {
    std::vector<double> sq(n);
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sq[j] = kernels::squared_l2(column(i), column(j));
      order.push_back(j);
    }
    auto closer = [&](std::size_t a, std::size_t b) {
      return sq[a] < sq[b] || (sq[a] == sq[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
    for (std::size_t j = 0; j < k; ++j) {
      graph.indices[i * k + j] = order[j];
      graph.distances[i * k + j] = std::sqrt(sq[order[j]]);
    }
  });
  return graph;
}

}  // namespace mvembed
