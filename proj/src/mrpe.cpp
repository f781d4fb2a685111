#include "mvembed/mrpe.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mvembed/error.hpp"
#include "mvembed/neighbors.hpp"
#include "mvembed/parallel.hpp"

namespace mvembed {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kClusterGap = 1e-10;
constexpr double kAcceptNorm = 1e-6;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Replaces columns [begin, end) of `vectors` with a canonical orthonormal
// basis of the same span.
void canonicalize_cluster(Eigen::MatrixXd& vectors, Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index size = end - begin;
  const Eigen::MatrixXd span_basis = vectors.middleCols(begin, size);
  Eigen::MatrixXd chosen(n, size);
  Eigen::Index count = 0;

  auto offer = [&](const Eigen::VectorXd& candidate) {
    Eigen::VectorXd u = span_basis * (span_basis.transpose() * candidate);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < count; ++c) u -= chosen.col(c).dot(u) * chosen.col(c);
    }
    const double norm = u.norm();
    if (norm > kAcceptNorm) chosen.col(count++) = u / norm;
  };

  offer(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
  for (Eigen::Index j = 0; j < n && count < size; ++j) offer(Eigen::VectorXd::Unit(n, j));
  if (count < size) throw Error(ErrorCode::EigenFailure, "could not canonicalize eigenspace");
  vectors.middleCols(begin, size) = chosen;
}

void fix_sign(Eigen::MatrixXd& y, Eigen::Index row) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    if (std::abs(y(row, j)) > best) {
      best = std::abs(y(row, j));
      arg = j;
    }
  }
  if (y(row, arg) < 0.0) y.row(row) *= -1.0;
}

}  // namespace

void MrpeConfig::validate(std::size_t n, std::size_t min_dim) const {
  if (!(r > 1.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "r must be > 1");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "d must be >= 1");
  if (d >= min_dim) {
    throw Error(ErrorCode::InvalidArgument, "d=" + std::to_string(d) +
                                                " must be below the smallest view dimension " +
                                                std::to_string(min_dim));
  }
  if (d + (drop_trivial ? 1 : 0) > n) {
    throw Error(ErrorCode::InvalidArgument, "d=" + std::to_string(d) + " too large for " +
                                                std::to_string(n) + " samples");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (k >= n) {
    throw Error(ErrorCode::KTooLarge,
                "k=" + std::to_string(k) + " needs more than " + std::to_string(n) + " samples");
  }
  if (reg_eps && !(*reg_eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "reg_eps must be >= 0");
}

SpectralSolution solve_embedding(const Eigen::MatrixXd& m, std::size_t d, bool drop_trivial) {
  const Eigen::Index n = m.rows();
  const Eigen::Index offset = drop_trivial ? 1 : 0;
  const Eigen::Index count = static_cast<Eigen::Index>(d);
  if (m.cols() != n) throw Error(ErrorCode::InvalidArgument, "matrix is not square");
  if (count < 1 || offset + count > n) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot select " + std::to_string(d) + " eigenvectors of a " + std::to_string(n) +
                    "x" + std::to_string(n) + " matrix");
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "symmetric eigensolver did not converge");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();
  Eigen::MatrixXd vectors = solver.eigenvectors();

  const Eigen::Index last = offset + count;  // one past the selection
  for (Eigen::Index begin = 0; begin < last;) {
    Eigen::Index end = begin + 1;
    while (end < n && values[end] - values[end - 1] < kClusterGap) ++end;
    if (end - begin > 1 && end > offset) canonicalize_cluster(vectors, begin, end);
    begin = end;
  }

  SpectralSolution out;
  out.y = vectors.middleCols(offset, count).transpose();
  for (Eigen::Index i = 0; i < count; ++i) fix_sign(out.y, i);
  out.eigenvalues = values.segment(offset, count);
  out.degenerate_subspace = (last < n && values[last] - values[last - 1] < kClusterGap) ||
                            (offset > 0 && values[offset] - values[offset - 1] < kClusterGap);
  return out;
}

Eigen::VectorXd update_alpha(std::span<const double> traces, double r) {
  if (!(r > 1.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "r must be > 1");
  if (traces.empty()) throw Error(ErrorCode::InvalidArgument, "no view traces");
  const Eigen::Index m = static_cast<Eigen::Index>(traces.size());
  for (double t : traces) {
    if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "view trace is NaN");
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  const auto zeros = std::count_if(traces.begin(), traces.end(), [](double t) { return t <= 0.0; });
  if (zeros > 0) {
    for (Eigen::Index v = 0; v < m; ++v) {
      if (traces[v] <= 0.0) alpha[v] = 1.0 / static_cast<double>(zeros);
    }
    return alpha;
  }

  const double exponent = 1.0 / (r - 1.0);
  Eigen::VectorXd log_w(m);
  for (Eigen::Index v = 0; v < m; ++v) log_w[v] = -exponent * std::log(traces[v]);
  const double top = log_w.maxCoeff();
  for (Eigen::Index v = 0; v < m; ++v) alpha[v] = std::exp(log_w[v] - top);
  return alpha / alpha.sum();
}

AlignmentMatrix combine_alignments(std::span<const AlignmentMatrix> alignments,
                                   const Eigen::VectorXd& alpha, double r) {
  if (alignments.empty()) throw Error(ErrorCode::InvalidArgument, "no alignment matrices");
  if (static_cast<std::size_t>(alpha.size()) != alignments.size()) {
    throw Error(ErrorCode::InvalidArgument, "alpha length does not match view count");
  }
  const Eigen::Index n = alignments.front().m.rows();
  AlignmentMatrix out{Eigen::MatrixXd::Zero(n, n)};
  for (std::size_t v = 0; v < alignments.size(); ++v) {
    if (alignments[v].m.rows() != n || alignments[v].m.cols() != n) {
      throw Error(ErrorCode::InvalidArgument, "alignment matrices differ in size");
    }
    const double a = alpha[static_cast<Eigen::Index>(v)];
    if (a == 0.0) continue;
    out.m += std::pow(a, r) * alignments[v].m;
  }
  return out;
}

double embedding_trace(const Eigen::MatrixXd& y, const Eigen::MatrixXd& m) {
  return (y * m).cwiseProduct(y).sum();
}

double weighted_objective(const Eigen::VectorXd& alpha, std::span<const double> traces, double r) {
  double total = 0.0;
  for (std::size_t v = 0; v < traces.size(); ++v) {
    const double a = alpha[static_cast<Eigen::Index>(v)];
    if (a != 0.0) total += std::pow(a, r) * traces[v];
  }
  return total;
}

std::vector<AlignmentMatrix> build_view_alignments(const MultiViewDataset& dataset, std::size_t k,
                                                   std::optional<double> reg_eps) {
  std::vector<AlignmentMatrix> out(dataset.view_count());
  for (std::size_t v = 0; v < dataset.view_count(); ++v) {
    const auto& view = dataset.view(v);
    const NeighborGraph graph = knn(view, k);
    out[v] = build_alignment(build_weight_matrix(view, graph, reg_eps));
  }
  return out;
}

EmbeddingResult fit_alignments(std::span<const AlignmentMatrix> alignments, const MrpeConfig& config) {
  if (alignments.empty()) throw Error(ErrorCode::InvalidArgument, "no alignment matrices");
  const auto start = Clock::now();
  const std::size_t m = alignments.size();

  EmbeddingResult result;
  result.config = config;
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  std::vector<double> traces(m);

  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    const auto iter_start = Clock::now();
    const AlignmentMatrix combined = combine_alignments(alignments, alpha, config.r);
    SpectralSolution solution = solve_embedding(combined.m, config.d, config.drop_trivial);
    for (std::size_t v = 0; v < m; ++v) traces[v] = embedding_trace(solution.y, alignments[v].m);
    const Eigen::VectorXd next_alpha = update_alpha(traces, config.r);
    const double objective = weighted_objective(next_alpha, traces, config.r);

    result.y = std::move(solution.y);
    result.eigenvalues = std::move(solution.eigenvalues);
    result.degenerate_subspace = solution.degenerate_subspace;
    result.objective_trace.push_back(objective);
    result.alpha_trace.push_back(next_alpha);
    result.iteration_seconds.push_back(seconds_since(iter_start));
    result.iters_run = iter + 1;

    const bool unchanged = next_alpha == alpha;
    alpha = next_alpha;
    if (m == 1 || unchanged) {
      result.converged = true;
      break;
    }
    if (result.objective_trace.size() >= 2) {
      const double prev = result.objective_trace[result.objective_trace.size() - 2];
      if (std::abs(objective - prev) <= config.tol * std::abs(prev)) {
        result.converged = true;
        break;
      }
    }
  }

  result.alpha = alpha;
  result.per_view_traces = Eigen::Map<const Eigen::VectorXd>(traces.data(), static_cast<Eigen::Index>(m));
  result.wall_time_seconds = seconds_since(start);
  return result;
}

EmbeddingResult fit(const MultiViewDataset& dataset, const MrpeConfig& config) {
  std::size_t min_dim = std::numeric_limits<std::size_t>::max();
  for (const auto& view : dataset.views()) min_dim = std::min(min_dim, view.dim());
  config.validate(dataset.n(), min_dim);

  const auto start = Clock::now();
  const std::vector<AlignmentMatrix> alignments = build_view_alignments(dataset, config.k, config.reg_eps);
  const double setup = seconds_since(start);

  EmbeddingResult result = fit_alignments(alignments, config);
  result.setup_seconds = setup;
  result.wall_time_seconds += setup;
  for (const auto& view : dataset.views()) result.view_names.push_back(view.name);
  return result;
}

}  // namespace mvembed
