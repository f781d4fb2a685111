#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvembed/dataset.hpp"
#include "mvembed/reconstruction.hpp"

namespace mvembed {

struct MrpeConfig {
  std::size_t d = 10;
  std::size_t k = 10;
  /// View-weight exponent, strictly greater than 1. Near 1 the weights
  /// concentrate on the view with the smallest trace; as r grows they
  /// flatten towards 1/m.
  double r = 5.0;
  /// Gram ridge; unset means default_reg_eps(k, D_v) per view.
  std::optional<double> reg_eps;
  std::size_t max_iters = 100;
  /// Stop once |obj_t - obj_{t-1}| <= tol * |obj_{t-1}|.
  double tol = 1e-7;
  /// Skip the eigenvector of the smallest eigenvalue (the constant vector).
  bool drop_trivial = true;

  /// Throws InvalidArgument/KTooLarge when the config cannot run on data
  /// with `n` samples whose smallest view dimension is `min_dim`.
  void validate(std::size_t n, std::size_t min_dim) const;
};

/// Eigenvectors of a symmetric matrix for the selected smallest eigenvalues.
struct SpectralSolution {
  Eigen::MatrixXd y;            ///< d x n, orthonormal rows
  Eigen::VectorXd eigenvalues;  ///< the d selected eigenvalues, ascending
  bool degenerate_subspace = false;
};

/// Rows of the result are unit eigenvectors of `m` for the d smallest
/// eigenvalues (eigenvalues 2..d+1 when drop_trivial).
///
/// The basis is canonical: inside any cluster of eigenvalues closer than
/// 1e-10, the cluster's eigenspace is re-spanned by orthogonalizing the
/// projections of the constant vector, e_0, e_1, ... in that order; then each
/// row is flipped so its largest-magnitude entry (first one on ties) is
/// positive. degenerate_subspace is set when the selected block's boundary
/// gaps are below 1e-10.
SpectralSolution solve_embedding(const Eigen::MatrixXd& m, std::size_t d, bool drop_trivial);

/// Closed-form view weights for fixed traces t_v:
///   alpha_v ∝ (1 / t_v)^(1 / (r - 1)),
/// evaluated in log space. Views with t_v <= 0 share all the weight equally
/// (the limit of the formula as those traces go to zero).
Eigen::VectorXd update_alpha(std::span<const double> traces, double r);

/// sum_v alpha_v^r M_v. Views with alpha_v = 0 are skipped.
AlignmentMatrix combine_alignments(std::span<const AlignmentMatrix> alignments,
                                   const Eigen::VectorXd& alpha, double r);

/// tr(Y M Y^T).
double embedding_trace(const Eigen::MatrixXd& y, const Eigen::MatrixXd& m);

/// sum_v alpha_v^r t_v.
double weighted_objective(const Eigen::VectorXd& alpha, std::span<const double> traces, double r);

struct EmbeddingResult {
  Eigen::MatrixXd y;  ///< d x n
  Eigen::VectorXd alpha;
  std::vector<double> objective_trace;
  std::vector<Eigen::VectorXd> alpha_trace;
  std::vector<double> iteration_seconds;
  Eigen::VectorXd per_view_traces;
  Eigen::VectorXd eigenvalues;
  std::size_t iters_run = 0;
  double setup_seconds = 0.0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  bool degenerate_subspace = false;
  MrpeConfig config;
  std::vector<std::string> view_names;
};

/// Per-view kNN -> weights -> alignment matrix.
std::vector<AlignmentMatrix> build_view_alignments(const MultiViewDataset& dataset, std::size_t k,
                                                   std::optional<double> reg_eps);

/// The alternating loop on precomputed alignment matrices. Starts from
/// uniform alpha; each iteration solves for Y with alpha fixed, then updates
/// alpha with Y fixed, and records the objective of the new (Y, alpha).
EmbeddingResult fit_alignments(std::span<const AlignmentMatrix> alignments, const MrpeConfig& config);

EmbeddingResult fit(const MultiViewDataset& dataset, const MrpeConfig& config);

}  // namespace mvembed
