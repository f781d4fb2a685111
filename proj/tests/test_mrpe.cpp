#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "gtest/gtest.h"
#include "mvembed/baselines.hpp"
#include "mvembed/error.hpp"
#include "mvembed/mrpe.hpp"
#include "mvembed/neighbors.hpp"
#include "mvembed/reconstruction.hpp"
#include "mvembed/synthetic.hpp"
#include "oracles.hpp"

using namespace mvembed;

namespace {

Eigen::VectorXd alpha_of(std::vector<double> traces, double r) { return update_alpha(traces, r); }

double dispersion(const Eigen::VectorXd& alpha) {
  return (alpha.array() - 1.0 / static_cast<double>(alpha.size())).abs().maxCoeff();
}

Eigen::MatrixXd random_psd(std::size_t n, std::mt19937_64& rng) {
  const Eigen::MatrixXd a = oracle::random_matrix(n, n, rng);
  return a * a.transpose();
}

std::vector<AlignmentMatrix> random_alignments(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  std::vector<AlignmentMatrix> out;
  for (std::size_t v = 0; v < m; ++v) {
    ReconstructionWeights w;
    w.weights = oracle::random_row_stochastic(n, 3, rng).sparseView();
    out.push_back(build_alignment(w));
  }
  return out;
}

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n = 120;
  return spec;
}

}  // namespace

TEST(UpdateAlpha, EqualTracesGiveUniform) {
  for (double r : {1.1, 2.0, 7.0}) {
    const Eigen::VectorXd a = alpha_of({0.3, 0.3, 0.3}, r);
    for (Eigen::Index v = 0; v < 3; ++v) EXPECT_NEAR(a[v], 1.0 / 3.0, 1e-15);
  }
}

TEST(UpdateAlpha, SingleView) { EXPECT_EQ(alpha_of({4.2}, 3.0)[0], 1.0); }

TEST(UpdateAlpha, TwoViewsSquareExponent) {
  const Eigen::VectorXd a = alpha_of({1.0, 2.0}, 2.0);
  EXPECT_NEAR(a[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(a[1], 1.0 / 3.0, 1e-15);
  const auto [best, arg] = oracle::simplex_grid_min({1.0, 2.0}, 2.0, 9999);
  EXPECT_NEAR(arg[0], 2.0 / 3.0, 1e-4);
  EXPECT_LE(weighted_objective(a, std::vector<double>{1.0, 2.0}, 2.0), best + 1e-12);
}

TEST(UpdateAlpha, ZeroTracesTakeAllWeight) {
  const Eigen::VectorXd a = alpha_of({0.0, 1.0, 0.0}, 2.0);
  EXPECT_EQ(a[0], 0.5);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_EQ(a[2], 0.5);
}

TEST(UpdateAlpha, ExtremeTracesStayFinite) {
  const Eigen::VectorXd a = alpha_of({1e-300, 1e300}, 1.01);
  EXPECT_TRUE(a.allFinite());
  EXPECT_NEAR(a.sum(), 1.0, 1e-12);
  EXPECT_NEAR(a[0], 1.0, 1e-12);
}

TEST(UpdateAlpha, RejectsBadInput) {
  EXPECT_THROW(alpha_of({1.0, 2.0}, 1.0), Error);
  EXPECT_THROW(alpha_of({std::nan(""), 2.0}, 2.0), Error);
  EXPECT_THROW(alpha_of({}, 2.0), Error);
}

TEST(UpdateAlpha, BeatsSimplexGrid) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (std::size_t m : {2u, 3u}) {
    for (double r : {1.5, 2.0, 5.0}) {
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> t(m);
        for (double& x : t) x = u(rng);
        const Eigen::VectorXd a = update_alpha(t, r);
        EXPECT_GE(a.minCoeff(), 0.0);
        EXPECT_NEAR(a.sum(), 1.0, 1e-12);
        const auto [best, arg] = oracle::simplex_grid_min(t, r, m == 2 ? 9999 : 140);
        EXPECT_LE(weighted_objective(a, t, r), best + 1e-8);
      }
    }
  }
}

TEST(UpdateAlpha, SmallerTraceNeverGetsLessWeight) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(4);
    for (double& x : t) x = u(rng) + 1e-3;
    const Eigen::VectorXd a = update_alpha(t, 1.5 + trial % 5);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        if (t[i] < t[j]) {
          EXPECT_GE(a[i], a[j]);
        }
  }
}

TEST(UpdateAlpha, DispersionShrinksAsExponentGrows) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> t(3);
    for (double& x : t) x = u(rng);
    double prev = 1.0;
    for (double r : {1.1, 2.0, 4.0, 8.0, 16.0}) {
      const double disp = dispersion(update_alpha(t, r));
      EXPECT_LE(disp, prev + 1e-15);
      prev = disp;
    }
  }
}

TEST(CombineAlignments, SingleViewIsIdentity) {
  std::mt19937_64 rng(1);
  const auto ms = random_alignments(1, 10, rng);
  EXPECT_EQ(combine_alignments(ms, Eigen::VectorXd::Ones(1), 3.0).m, ms[0].m);
}

TEST(CombineAlignments, ZeroWeightAnnihilates) {
  std::mt19937_64 rng(2);
  const auto ms = random_alignments(2, 10, rng);
  Eigen::VectorXd a(2);
  a << 1.0, 0.0;
  EXPECT_EQ(combine_alignments(ms, a, 4.0).m, ms[0].m);
}

TEST(CombineAlignments, StaysPsd) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ms = random_alignments(3, 20, rng);
    const Eigen::VectorXd a = update_alpha(std::vector<double>{1.0, 2.0, 3.0 + trial}, 2.5);
    const AlignmentMatrix c = combine_alignments(ms, a, 2.5);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.m, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(SolveEmbedding, DiagonalKeepTrivial) {
  const Eigen::MatrixXd m = Eigen::Vector4d(0, 1, 2, 3).asDiagonal();
  const SpectralSolution s = solve_embedding(m, 2, false);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 4);
  expect(0, 0) = 1.0;
  expect(1, 1) = 1.0;
  EXPECT_EQ(s.y, expect);
  EXPECT_NEAR(s.eigenvalues.sum(), 1.0, 1e-15);
  EXPECT_FALSE(s.degenerate_subspace);
}

TEST(SolveEmbedding, DiagonalDropTrivial) {
  const Eigen::MatrixXd m = Eigen::Vector4d(0, 1, 2, 3).asDiagonal();
  const SpectralSolution s = solve_embedding(m, 2, true);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 4);
  expect(0, 1) = 1.0;
  expect(1, 2) = 1.0;
  EXPECT_EQ(s.y, expect);
  EXPECT_NEAR(s.eigenvalues.sum(), 3.0, 1e-15);
}

TEST(SolveEmbedding, RandomPsdResidualsAndTrace) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd m = random_psd(20, rng);
    const SpectralSolution s = solve_embedding(m, 5, trial % 2 == 0);
    for (Eigen::Index i = 0; i < 5; ++i) {
      const Eigen::VectorXd v = s.y.row(i).transpose();
      EXPECT_LE((m * v - s.eigenvalues[i] * v).norm(), 1e-8);
    }
    EXPECT_NEAR(embedding_trace(s.y, m), s.eigenvalues.sum(), 1e-9);
    EXPECT_LE((s.y * s.y.transpose() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const Eigen::Index off = trial % 2 == 0 ? 1 : 0;
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(s.eigenvalues[i], es.eigenvalues()[i + off], 1e-9);
  }
}

TEST(SolveEmbedding, SignRuleMakesLargestEntryPositive) {
  std::mt19937_64 rng(11);
  const SpectralSolution s = solve_embedding(random_psd(15, rng), 4, false);
  for (Eigen::Index i = 0; i < 4; ++i) {
    Eigen::Index j = 0;
    s.y.row(i).cwiseAbs().maxCoeff(&j);
    EXPECT_GT(s.y(i, j), 0.0);
  }
}

TEST(SolveEmbedding, RepeatedEigenvalueIsCanonicalAndFlagged) {
  // The identity has one cluster; any rotation of the input must give the
  // same canonical basis.
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd q = oracle::random_orthogonal(6, rng);
  const Eigen::MatrixXd m1 = Eigen::MatrixXd::Identity(6, 6);
  const Eigen::MatrixXd m2 = q * m1 * q.transpose();
  const SpectralSolution a = solve_embedding(m1, 3, false);
  const SpectralSolution b = solve_embedding(0.5 * (m2 + m2.transpose()), 3, false);
  EXPECT_TRUE(a.degenerate_subspace);
  EXPECT_LE((a.y - b.y).cwiseAbs().maxCoeff(), 1e-8);
  // First canonical direction is the normalized constant vector.
  EXPECT_LE((a.y.row(0).array() - 1.0 / std::sqrt(6.0)).abs().maxCoeff(), 1e-12);
}

TEST(SolveEmbedding, RejectsTooLargeD) {
  EXPECT_THROW(solve_embedding(Eigen::MatrixXd::Identity(4, 4), 4, true), Error);
  EXPECT_THROW(solve_embedding(Eigen::MatrixXd::Identity(4, 4), 0, false), Error);
}

TEST(Config, Validation) {
  MrpeConfig c;
  c.d = 3;
  c.k = 5;
  EXPECT_NO_THROW(c.validate(50, 10));
  auto bad = c;
  bad.r = 1.0;
  EXPECT_THROW(bad.validate(50, 10), Error);
  bad = c;
  bad.d = 10;
  EXPECT_THROW(bad.validate(50, 10), Error);
  bad = c;
  bad.tol = 0.0;
  EXPECT_THROW(bad.validate(50, 10), Error);
  bad = c;
  bad.max_iters = 0;
  EXPECT_THROW(bad.validate(50, 10), Error);
  bad = c;
  bad.k = 50;
  try {
    bad.validate(50, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KTooLarge);
  }
}

TEST(Fit, SingleViewMatchesLle) {
  SynthSpec spec = small_spec();
  spec.views = {{8, 1.0, 1.0, "only"}};
  const MultiViewDataset ds = generate_synthetic(spec);
  MrpeConfig cfg;
  cfg.d = 3;
  cfg.k = 8;
  const EmbeddingResult res = fit(ds, cfg);
  const SpectralSolution ref = lle(ds.view(0), 3, 8);
  EXPECT_EQ(res.iters_run, 1u);
  EXPECT_EQ(res.alpha[0], 1.0);
  const auto ms = build_view_alignments(ds, 8, std::nullopt);
  EXPECT_NEAR(embedding_trace(res.y, ms[0].m), embedding_trace(ref.y, ms[0].m), 1e-8);
  if (!ref.degenerate_subspace) {
    EXPECT_LE(oracle::principal_angles(res.y, ref.y).maxCoeff(), 1e-6);
  }
}

TEST(Fit, DuplicatedViewKeepsEqualWeights) {
  SynthSpec spec = small_spec();
  spec.views = {{8, 1.0, 1.0, "only"}};
  const MultiViewDataset one = generate_synthetic(spec);
  const MultiViewDataset two = MultiViewDataset::make({one.view(0), one.view(0)}, one.labels());
  MrpeConfig cfg;
  cfg.d = 3;
  cfg.k = 8;
  const EmbeddingResult r1 = fit(one, cfg);
  const EmbeddingResult r2 = fit(two, cfg);
  for (const auto& a : r2.alpha_trace) {
    EXPECT_NEAR(a[0], 0.5, 1e-10);
    EXPECT_NEAR(a[1], 0.5, 1e-10);
  }
  EXPECT_LE((r1.y - r2.y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fit, TwoViewInvariants) {
  const MultiViewDataset ds = generate_synthetic(small_spec());
  std::vector<double> disp;
  for (double r : {2.0, 5.0}) {
    MrpeConfig cfg;
    cfg.d = 4;
    cfg.k = 8;
    cfg.r = r;
    const EmbeddingResult res = fit(ds, cfg);
    ASSERT_GE(res.objective_trace.size(), 1u);
    for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
      EXPECT_LE(res.objective_trace[t], res.objective_trace[t - 1] + 1e-10);
    EXPECT_LE((res.y * res.y.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(res.alpha.minCoeff(), 0.0);
    EXPECT_NEAR(res.alpha.sum(), 1.0, 1e-10);
    EXPECT_EQ(res.objective_trace.size(), res.iters_run);
    EXPECT_EQ(res.alpha_trace.size(), res.iters_run);

    // The final alpha solves its subproblem for the final traces.
    const std::vector<double> t(res.per_view_traces.data(), res.per_view_traces.data() + 2);
    const auto [best, arg] = oracle::simplex_grid_min(t, r, 9999);
    EXPECT_LE(weighted_objective(res.alpha, t, r), best + 1e-8);
    if (t[0] < t[1]) {
      EXPECT_GE(res.alpha[0], res.alpha[1]);
    }
    if (t[1] < t[0]) {
      EXPECT_GE(res.alpha[1], res.alpha[0]);
    }
    disp.push_back(dispersion(res.alpha));
  }
  EXPECT_LE(disp[1], disp[0]);
}

TEST(Fit, SamplePermutationEquivariance) {
  // Noisy enough that each view's neighbor graph is connected, so the
  // selected eigenspace is well separated.
  SynthSpec spec = small_spec();
  spec.noise_sigma = 2.0;
  const MultiViewDataset ds = generate_synthetic(spec);
  const std::size_t n = ds.n();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(99));
  std::vector<ViewMatrix> views;
  for (const ViewMatrix& v : ds.views()) {
    ViewMatrix p{Eigen::MatrixXd(v.data.rows(), n), v.name};
    for (std::size_t i = 0; i < n; ++i) p.data.col(i) = v.data.col(perm[i]);
    views.push_back(std::move(p));
  }
  const MultiViewDataset permuted = MultiViewDataset::make(views);
  MrpeConfig cfg;
  cfg.d = 4;
  cfg.k = 8;
  const EmbeddingResult a = fit(ds, cfg);
  const EmbeddingResult b = fit(permuted, cfg);
  ASSERT_FALSE(a.degenerate_subspace);
  EXPECT_NEAR(a.objective_trace.back(), b.objective_trace.back(), 1e-8 * (1.0 + a.objective_trace.back()));

  // Nearest neighbor of each sample in the embedding must be the same sample.
  Eigen::MatrixXd yb(b.y.rows(), n);
  for (std::size_t i = 0; i < n; ++i) yb.col(perm[i]) = b.y.col(i);
  const NeighborGraph ga = knn(a.y, 1);
  const NeighborGraph gb = knn(yb, 1);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(ga.index(i, 0), gb.index(i, 0)) << "sample " << i;
}

TEST(Fit, MaxItersCapsTheLoop) {
  const MultiViewDataset ds = generate_synthetic(small_spec());
  MrpeConfig cfg;
  cfg.d = 3;
  cfg.k = 8;
  cfg.max_iters = 2;
  cfg.tol = 1e-300;
  const EmbeddingResult res = fit(ds, cfg);
  EXPECT_LE(res.iters_run, 2u);
}

TEST(Fit, InvalidConfigIsRejected) {
  const MultiViewDataset ds = generate_synthetic(small_spec());
  MrpeConfig cfg;
  cfg.d = 20;  // equals the smallest view dimension
  EXPECT_THROW(fit(ds, cfg), Error);
}
