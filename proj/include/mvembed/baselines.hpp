#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mvembed/dataset.hpp"
#include "mvembed/mrpe.hpp"

namespace mvembed {

/// Single-view LLE. Shares kNN, weight solving and the eigen step with the
/// multi-view fit but none of its loop.
SpectralSolution lle(const ViewMatrix& view, std::size_t d, std::size_t k,
                     std::optional<double> reg_eps = std::nullopt, bool drop_trivial = true);

/// Stacks all views vertically, preserving view order.
ViewMatrix concat_views(const MultiViewDataset& dataset);

struct LaplacianOptions {
  /// Heat-kernel width; unset means the median kNN distance.
  std::optional<double> heat_sigma;
  /// 0/1 edge weights instead of the heat kernel.
  bool binary = false;
};

struct LaplacianEmbedding {
  Eigen::MatrixXd y;  ///< d x n, D-orthonormal rows
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd degrees;
  double heat_sigma = 0.0;
  bool disconnected = false;
  bool degenerate_subspace = false;
};

/// Laplacian eigenmaps on the symmetrized kNN graph: solves L y = λ D y and
/// keeps the d smallest eigenpairs after the trivial one. A disconnected
/// graph is flagged rather than rejected.
LaplacianEmbedding laplacian_eigenmaps(const ViewMatrix& view, std::size_t d, std::size_t k,
                                       const LaplacianOptions& opts = {});

enum class BaselineKind { SingleViewLLE, ConcatLLE, SingleViewLE, ConcatLE };

std::string_view to_string(BaselineKind kind);
/// Accepts slle, fclle, sle, fcle.
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineParams {
  std::size_t d = 10;
  std::size_t k = 10;
  std::optional<double> reg_eps;
  bool drop_trivial = true;
  LaplacianOptions laplacian;
  /// Restricts single-view kinds to one view; otherwise every view is run.
  std::optional<std::size_t> view_index;
};

struct BaselineEmbedding {
  std::string name;  ///< view name, or "concat"
  Eigen::MatrixXd y;
  bool degenerate_subspace = false;
  bool disconnected = false;
};

/// Single-view kinds fan out to one embedding per view so the caller can pick
/// the best one downstream; concatenated kinds return exactly one.
std::vector<BaselineEmbedding> run_baseline(BaselineKind kind, const MultiViewDataset& dataset,
                                            const BaselineParams& params);

}  // namespace mvembed
