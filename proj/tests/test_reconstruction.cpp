#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "gtest/gtest.h"
#include "mvembed/error.hpp"
#include "mvembed/neighbors.hpp"
#include "mvembed/reconstruction.hpp"
#include "oracles.hpp"

using namespace mvembed;

namespace {

double gram_trace(const Eigen::VectorXd& x, const Eigen::MatrixXd& nbrs) {
  return (nbrs.colwise() - x).squaredNorm();
}

ReconstructionWeights from_dense(const Eigen::MatrixXd& w) {
  ReconstructionWeights out;
  out.weights = w.sparseView();
  return out;
}

}  // namespace

TEST(LocalWeights, SymmetricNeighborsGetEqualWeights) {
  Eigen::VectorXd x(1);
  x << 0.0;
  Eigen::MatrixXd n(1, 2);
  n << -1.0, 1.0;
  const Eigen::VectorXd w = solve_local_weights(x, n, 1e-3);
  EXPECT_NEAR(w[0], 0.5, 1e-15);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
}

TEST(LocalWeights, SingleIdenticalNeighbor) {
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  const Eigen::MatrixXd n = x;
  const Eigen::VectorXd w = solve_local_weights(x, n, 1e-12);
  ASSERT_EQ(w.size(), 1);
  EXPECT_EQ(w[0], 1.0);
}

TEST(LocalWeights, AllNeighborsCoincideWithSample) {
  Eigen::VectorXd x(2);
  x << 1.0, 1.0;
  const Eigen::MatrixXd n = x.replicate(1, 4);
  const Eigen::VectorXd w = solve_local_weights(x, n, 1e-3);
  for (Eigen::Index j = 0; j < 4; ++j) EXPECT_EQ(w[j], 0.25);
}

// Dense grid over the affine plane w3 = 1 - w1 - w2, refined around the best
// cell, minimizing the ridged objective the solver is defined by.
TEST(LocalWeights, TriangleMatchesGridOracle) {
  Eigen::VectorXd x(2);
  x << 0.2, 0.0;
  Eigen::MatrixXd n(2, 3);
  n << 0.0, 1.0, 0.0,
       0.0, 0.0, 1.0;
  const double eps = 1e-3;
  const double ridge = eps * gram_trace(x, n);
  const Eigen::VectorXd w = solve_local_weights(x, n, eps);

  double c1 = 0.5, c2 = 0.5, span = 2.0, best = 1e300;
  for (int level = 0; level < 8; ++level) {
    double b1 = c1, b2 = c2;
    for (int i = -50; i <= 50; ++i) {
      for (int j = -50; j <= 50; ++j) {
        Eigen::Vector3d cand;
        cand << c1 + span * i / 50.0, c2 + span * j / 50.0, 0.0;
        cand[2] = 1.0 - cand[0] - cand[1];
        const double f = oracle::local_objective(x, n, cand, ridge);
        if (f < best) {
          best = f;
          b1 = cand[0];
          b2 = cand[1];
        }
      }
    }
    c1 = b1;
    c2 = b2;
    span /= 10.0;
  }
  EXPECT_NEAR(w[0], c1, 1e-6);
  EXPECT_NEAR(w[1], c2, 1e-6);
  EXPECT_NEAR(w.sum(), 1.0, 1e-14);

  // As the ridge vanishes the barycentric coordinates (0.8, 0.2, 0) appear.
  const Eigen::VectorXd w_small = solve_local_weights(x, n, 1e-10);
  EXPECT_NEAR(w_small[0], 0.8, 1e-6);
  EXPECT_NEAR(w_small[1], 0.2, 1e-6);
  EXPECT_NEAR(w_small[2], 0.0, 1e-6);
}

TEST(LocalWeights, MatchesNullSpaceOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 3 + trial % 10;
    const std::size_t k = 2 + trial % 8;
    const Eigen::VectorXd x = oracle::random_matrix(dim, 1, rng);
    const Eigen::MatrixXd n = oracle::random_matrix(dim, k, rng);
    const double eps = default_reg_eps(k, dim);
    const double ridge = eps * gram_trace(x, n);
    const Eigen::VectorXd w = solve_local_weights(x, n, eps);
    const Eigen::VectorXd ref = oracle::constrained_lsq(x, n, ridge);
    EXPECT_NEAR(oracle::local_objective(x, n, w, ridge), oracle::local_objective(x, n, ref, ridge), 1e-10);
    EXPECT_LE((w - ref).cwiseAbs().maxCoeff(), 1e-7) << "dim=" << dim << " k=" << k;
  }
}

TEST(LocalWeights, TranslationInvariance) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = oracle::random_matrix(5, 1, rng);
    const Eigen::MatrixXd n = oracle::random_matrix(5, 4, rng);
    const Eigen::VectorXd shift = 10.0 * oracle::random_matrix(5, 1, rng);
    const Eigen::VectorXd w = solve_local_weights(x, n, 1e-12);
    const Eigen::VectorXd ws = solve_local_weights(x + shift, n.colwise() + shift, 1e-12);
    EXPECT_LE((w - ws).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LocalWeights, SingularSystemWithoutRidgeIsReported) {
  // Three neighbors in one dimension: the Gram matrix has rank one.
  Eigen::VectorXd x(1);
  x << 0.3;
  Eigen::MatrixXd n(1, 3);
  n << 0.0, 1.0, 2.0;
  try {
    solve_local_weights(x, n, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateNeighborhood);
  }
}

TEST(LocalWeights, RejectsMismatchedShapes) {
  EXPECT_THROW(solve_local_weights(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(3, 2), 1e-3), Error);
  EXPECT_THROW(solve_local_weights(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 0), 1e-3), Error);
}

TEST(WeightMatrix, CollinearMiddleRow) {
  ViewMatrix view{Eigen::MatrixXd(1, 3), "line"};
  view.data << 0.0, 1.0, 2.0;
  const ReconstructionWeights w = build_weight_matrix(view, knn(view, 2));
  const Eigen::MatrixXd dense = w.weights;
  EXPECT_NEAR(dense(1, 0), 0.5, 1e-9);
  EXPECT_NEAR(dense(1, 2), 0.5, 1e-9);
  EXPECT_EQ(dense(1, 1), 0.0);
}

TEST(WeightMatrix, RowsSumToOneAndMatchPerRowOracle) {
  std::mt19937_64 rng(9);
  ViewMatrix view{oracle::random_matrix(6, 30, rng), "rand"};
  const std::size_t k = 5;
  const NeighborGraph g = knn(view, k);
  const ReconstructionWeights w = build_weight_matrix(view, g);
  const Eigen::MatrixXd dense = w.weights;
  const double eps = default_reg_eps(k, 6);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_NEAR(dense.row(i).sum(), 1.0, 1e-10);
    EXPECT_EQ(dense(i, i), 0.0);
    EXPECT_LE(static_cast<std::size_t>((dense.row(i).array() != 0.0).count()), k);
    Eigen::MatrixXd nbrs(6, k);
    for (std::size_t j = 0; j < k; ++j) nbrs.col(j) = view.data.col(g.index(i, j));
    const Eigen::VectorXd x = view.data.col(i);
    const Eigen::VectorXd ref = oracle::constrained_lsq(x, nbrs, eps * gram_trace(x, nbrs));
    for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(dense(i, g.index(i, j)), ref[j], 1e-8);
  }
}

TEST(WeightMatrix, DegenerateNeighborhoodNamesSample) {
  ViewMatrix view{Eigen::MatrixXd(1, 5), "flat"};
  view.data << 0.0, 1.0, 2.0, 3.0, 4.5;
  try {
    build_weight_matrix(view, knn(view, 3), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateNeighborhood);
    EXPECT_NE(std::string(e.what()).find("sample 0"), std::string::npos);
  }
}

TEST(Alignment, ZeroWeightsGiveIdentity) {
  ReconstructionWeights w;
  w.weights.resize(4, 4);
  EXPECT_EQ(build_alignment(w).m, Eigen::MatrixXd::Identity(4, 4));
}

TEST(Alignment, OnesInNullSpaceSymmetricPsd) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const AlignmentMatrix a = build_alignment(from_dense(oracle::random_row_stochastic(25, 4, rng)));
    EXPECT_LE((a.m * Eigen::VectorXd::Ones(25)).norm(), 1e-8 * a.m.norm());
    EXPECT_LE((a.m - a.m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.m, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(Alignment, BuiltFromDataIsPsd) {
  std::mt19937_64 rng(12);
  ViewMatrix view{oracle::random_matrix(4, 60, rng), "v"};
  const AlignmentMatrix a = build_alignment(build_weight_matrix(view, knn(view, 8)));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.m, Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  EXPECT_LE((a.m * Eigen::VectorXd::Ones(60)).norm(), 1e-8 * a.m.norm());
}

TEST(Alignment, ReconstructionSumEqualsTraceForm) {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 8 + trial % 20;
    const Eigen::MatrixXd wd = oracle::random_row_stochastic(n, 1 + trial % 6, rng);
    const Eigen::MatrixXd y = oracle::random_matrix(1 + trial % 4, n, rng);
    const ReconstructionWeights w = from_dense(wd);
    const double tr = (y * build_alignment(w).m * y.transpose()).trace();
    const double direct = oracle::reconstruction_sum(y, wd);
    EXPECT_LE(std::abs(direct - tr), 1e-9 * (1.0 + std::abs(tr)));
    EXPECT_LE(std::abs(reconstruction_cost(y, w) - direct), 1e-9 * (1.0 + std::abs(tr)));
  }
}
