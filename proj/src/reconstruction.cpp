#include "mvembed/reconstruction.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>

#include "mvembed/error.hpp"
#include "mvembed/kernels.hpp"
#include "mvembed/parallel.hpp"

namespace mvembed {

double default_reg_eps(std::size_t k, std::size_t dim) { return k > dim ? 1e-3 : 1e-12; }

Eigen::VectorXd solve_local_weights(const Eigen::VectorXd& x, const Eigen::MatrixXd& neighbors,
                                    double reg_eps) {
  const Eigen::Index k = neighbors.cols();
  const Eigen::Index dim = x.size();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "need at least one neighbor");
  if (neighbors.rows() != dim) {
    throw Error(ErrorCode::InvalidArgument, "neighbor dimension does not match the sample");
  }
  if (!(reg_eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "reg_eps must be >= 0");

  const Eigen::MatrixXd diffs = (-neighbors).colwise() + x;
  Eigen::MatrixXd gram(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const std::span<const double> zj(diffs.col(j).data(), static_cast<std::size_t>(dim));
    for (Eigen::Index l = j; l < k; ++l) {
      const double g = kernels::dot(zj, std::span<const double>(diffs.col(l).data(), zj.size()));
      gram(j, l) = g;
      gram(l, j) = g;
    }
  }

  const double trace = gram.trace();
  if (trace == 0.0) return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  gram.diagonal().array() += reg_eps * trace;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  // rcond() skips exactly-zero pivots, so check the pivot spread as well.
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double eps = std::numeric_limits<double>::epsilon();
  if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= eps * pivots.maxCoeff() || ldlt.rcond() < eps) {
    throw Error(ErrorCode::DegenerateNeighborhood, "local Gram system is singular");
  }
  Eigen::VectorXd w = ldlt.solve(Eigen::VectorXd::Ones(k));
  const double total = w.sum();
  if (!std::isfinite(total) || total == 0.0 || !w.allFinite()) {
    throw Error(ErrorCode::DegenerateNeighborhood, "local Gram solve produced no usable weights");
  }
  return w / total;
}

ReconstructionWeights build_weight_matrix(const ViewMatrix& view, const NeighborGraph& graph,
                                          std::optional<double> reg_eps) {
  const std::size_t n = view.samples();
  const std::size_t k = graph.k;
  if (graph.n != n) {
    throw Error(ErrorCode::InvalidArgument, "neighbor graph does not belong to view '" + view.name + "'");
  }
  const double eps = reg_eps.value_or(default_reg_eps(k, view.dim()));

  std::vector<Eigen::VectorXd> rows(n);
  parallel_for(n, [&](std::size_t i) {
    Eigen::MatrixXd nbrs(view.dim(), k);
    for (std::size_t j = 0; j < k; ++j) nbrs.col(j) = view.data.col(graph.index(i, j));
    try {
      rows[i] = solve_local_weights(view.data.col(i), nbrs, eps);
    } catch (const Error& e) {
      rethrow_with_context(e, "view '" + view.name + "' sample " + std::to_string(i));
    }
  });

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      triplets.emplace_back(i, graph.index(i, j), rows[i][j]);
    }
  }
  ReconstructionWeights out;
  out.weights.resize(n, n);
  out.weights.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

AlignmentMatrix build_alignment(const ReconstructionWeights& weights) {
  const Eigen::Index n = weights.weights.rows();
  SparseRowMatrix identity(n, n);
  identity.setIdentity();
  const SparseRowMatrix residual = identity - weights.weights;
  const Eigen::SparseMatrix<double> product = SparseRowMatrix(residual.transpose()) * residual;
  Eigen::MatrixXd m = Eigen::MatrixXd(product);
  AlignmentMatrix out;
  out.m = 0.5 * (m + m.transpose());
  return out;
}

double reconstruction_cost(const Eigen::MatrixXd& y, const ReconstructionWeights& weights) {
  const Eigen::MatrixXd reconstructed = y * SparseRowMatrix(weights.weights.transpose());
  return (y - reconstructed).squaredNorm();
}

}  // namespace mvembed
