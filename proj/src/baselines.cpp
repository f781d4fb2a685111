#include "mvembed/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Eigenvalues>

#include "mvembed/error.hpp"
#include "mvembed/neighbors.hpp"
#include "mvembed/reconstruction.hpp"

namespace mvembed {
namespace {

constexpr double kClusterGap = 1e-10;

bool is_connected(const Eigen::MatrixXd& adjacency) {
  const Eigen::Index n = adjacency.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<Eigen::Index> queue{0};
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!queue.empty()) {
    const Eigen::Index i = queue.front();
    queue.pop_front();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!seen[j] && adjacency(i, j) > 0.0) {
        seen[j] = 1;
        ++reached;
        queue.push_back(j);
      }
    }
  }
  return reached == n;
}

}  // namespace

SpectralSolution lle(const ViewMatrix& view, std::size_t d, std::size_t k,
                     std::optional<double> reg_eps, bool drop_trivial) {
  const NeighborGraph graph = knn(view, k);
  const AlignmentMatrix m = build_alignment(build_weight_matrix(view, graph, reg_eps));
  return solve_embedding(m.m, d, drop_trivial);
}

ViewMatrix concat_views(const MultiViewDataset& dataset) {
  Eigen::Index rows = 0;
  for (const auto& view : dataset.views()) rows += view.data.rows();
  ViewMatrix out{Eigen::MatrixXd(rows, static_cast<Eigen::Index>(dataset.n())), "concat"};
  Eigen::Index at = 0;
  for (const auto& view : dataset.views()) {
    out.data.middleRows(at, view.data.rows()) = view.data;
    at += view.data.rows();
  }
  return out;
}

LaplacianEmbedding laplacian_eigenmaps(const ViewMatrix& view, std::size_t d, std::size_t k,
                                       const LaplacianOptions& opts) {
  const NeighborGraph graph = knn(view, k);
  const std::size_t n = graph.n;
  if (d < 1 || d + 1 > n) {
    throw Error(ErrorCode::InvalidArgument, "d=" + std::to_string(d) + " too large for " +
                                                std::to_string(n) + " samples");
  }

  LaplacianEmbedding out;
  if (!opts.binary) {
    if (opts.heat_sigma) {
      if (!(*opts.heat_sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "heat_sigma must be > 0");
      out.heat_sigma = *opts.heat_sigma;
    } else {
      std::vector<double> dists = graph.distances;
      std::sort(dists.begin(), dists.end());
      const std::size_t h = dists.size() / 2;
      const double median = dists.size() % 2 ? dists[h] : 0.5 * (dists[h - 1] + dists[h]);
      out.heat_sigma = median > 0.0 ? median : 1.0;
    }
  }

  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < graph.k; ++j) {
      const std::size_t nb = graph.index(i, j);
      const double dist = graph.distance(i, j);
      const double w =
          opts.binary ? 1.0 : std::exp(-(dist * dist) / (out.heat_sigma * out.heat_sigma));
      adjacency(i, nb) = w;
      adjacency(nb, i) = w;
    }
  }

  out.degrees = adjacency.rowwise().sum();
  if ((out.degrees.array() <= 0.0).any()) {
    throw Error(ErrorCode::EigenFailure, "graph has a vertex with zero degree; increase heat_sigma");
  }
  out.laplacian = Eigen::MatrixXd(out.degrees.asDiagonal()) - adjacency;
  out.disconnected = !is_connected(adjacency);

  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      out.laplacian, Eigen::MatrixXd(out.degrees.asDiagonal()));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "generalized eigensolver did not converge");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::Index count = static_cast<Eigen::Index>(d);
  out.y = solver.eigenvectors().middleCols(1, count).transpose();
  out.eigenvalues = values.segment(1, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Eigen::Index arg = 0;
    out.y.row(i).cwiseAbs().maxCoeff(&arg);
    if (out.y(i, arg) < 0.0) out.y.row(i) *= -1.0;
  }
  const Eigen::Index last = count + 1;
  out.degenerate_subspace = values[1] - values[0] < kClusterGap ||
                            (last < static_cast<Eigen::Index>(n) && values[last] - values[last - 1] < kClusterGap);
  return out;
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::SingleViewLLE: return "slle";
    case BaselineKind::ConcatLLE: return "fclle";
    case BaselineKind::SingleViewLE: return "sle";
    case BaselineKind::ConcatLE: return "fcle";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  for (BaselineKind kind : {BaselineKind::SingleViewLLE, BaselineKind::ConcatLLE,
                            BaselineKind::SingleViewLE, BaselineKind::ConcatLE}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown baseline kind '" + std::string(name) + "'");
}

std::vector<BaselineEmbedding> run_baseline(BaselineKind kind, const MultiViewDataset& dataset,
                                            const BaselineParams& params) {
  auto embed = [&](const ViewMatrix& view, bool use_lle) {
    BaselineEmbedding out;
    out.name = view.name;
    if (use_lle) {
      SpectralSolution s = lle(view, params.d, params.k, params.reg_eps, params.drop_trivial);
      out.y = std::move(s.y);
      out.degenerate_subspace = s.degenerate_subspace;
    } else {
      LaplacianEmbedding le = laplacian_eigenmaps(view, params.d, params.k, params.laplacian);
      out.y = std::move(le.y);
      out.degenerate_subspace = le.degenerate_subspace;
      out.disconnected = le.disconnected;
    }
    return out;
  };

  const bool use_lle = kind == BaselineKind::SingleViewLLE || kind == BaselineKind::ConcatLLE;
  std::vector<BaselineEmbedding> results;
  if (kind == BaselineKind::ConcatLLE || kind == BaselineKind::ConcatLE) {
    results.push_back(embed(concat_views(dataset), use_lle));
    return results;
  }
  if (params.view_index) {
    if (*params.view_index >= dataset.view_count()) {
      throw Error(ErrorCode::InvalidArgument, "view index " + std::to_string(*params.view_index) +
                                                  " out of range");
    }
    results.push_back(embed(dataset.view(*params.view_index), use_lle));
    return results;
  }
  for (const auto& view : dataset.views()) {
    try {
      results.push_back(embed(view, use_lle));
    } catch (const Error& e) {
      rethrow_with_context(e, "view '" + view.name + "'");
    }
  }
  return results;
}

}  // namespace mvembed
