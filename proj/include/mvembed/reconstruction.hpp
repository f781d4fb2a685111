#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mvembed/dataset.hpp"
#include "mvembed/neighbors.hpp"

namespace mvembed {

/// Gram ridge used when the caller does not pick one: 1e-3 when the local
/// Gram matrix is rank-deficient by construction (k > D), else 1e-12.
double default_reg_eps(std::size_t k, std::size_t dim);

/// Sum-to-one weights reconstructing `x` from the columns of `neighbors`
/// (D x k). Minimizes ||x - N w||^2 + reg_eps * tr(G) * ||w||^2 subject to
/// sum(w) = 1, where G is the local Gram matrix of the differences x - n_j.
/// When tr(G) = 0 every feasible w is optimal and the uniform 1/k is returned.
/// Throws DegenerateNeighborhood if the ridged system is still singular.
Eigen::VectorXd solve_local_weights(const Eigen::VectorXd& x, const Eigen::MatrixXd& neighbors,
                                    double reg_eps);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Row i holds sample i's reconstruction weights on its neighbor columns.
struct ReconstructionWeights {
  SparseRowMatrix weights;
};

/// Solves every row of a view's weight matrix. `reg_eps` defaults to
/// default_reg_eps(graph.k, view.dim()).
ReconstructionWeights build_weight_matrix(const ViewMatrix& view, const NeighborGraph& graph,
                                          std::optional<double> reg_eps = std::nullopt);

/// Dense symmetric PSD alignment matrix of one view.
struct AlignmentMatrix {
  Eigen::MatrixXd m;
};

/// M = (I - W)^T (I - W) for row-stored W, so that
///   sum_i ||y_i - sum_j w_ij y_j||^2 = tr(Y M Y^T)
/// for any d x n embedding Y. Symmetrized as (M + M^T) / 2.
AlignmentMatrix build_alignment(const ReconstructionWeights& weights);

/// Direct evaluation of sum_i ||y_i - sum_j w_ij y_j||^2.
double reconstruction_cost(const Eigen::MatrixXd& y, const ReconstructionWeights& weights);

}  // namespace mvembed
