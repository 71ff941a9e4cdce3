#include "fixtures.hpp"

#include "mmp/analysis.hpp"
#include "mmp/bench.hpp"
#include "mmp/solvers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace mmp;

namespace {

struct Instance {
  SensingMatrix matrix;
  SparseSignal x;
  Vector y;
};

Instance noiseless(Index m, Index n, Index K, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  SensingMatrix a = gen_sensing_matrix(m, n, rng);
  SparseSignal x = gen_sparse_signal(n, K, rng);
  Vector y = a.entries() * x.values;
  return {std::move(a), std::move(x), std::move(y)};
}

SolverConfig config(Index K, Index L) {
  SolverConfig c;
  c.sparsity = K;
  c.expansion = L;
  return c;
}

std::uint64_t choose(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

// Layer orders of the depth-first enumeration, L = 2, K = 4.
TEST(ModuloOrder, TableRows) {
  const std::vector<std::pair<std::uint64_t, std::vector<Index>>> rows{
      {1, {1, 1, 1, 1}}, {2, {2, 1, 1, 1}}, {3, {1, 2, 1, 1}}, {4, {2, 2, 1, 1}},
      {5, {1, 1, 2, 1}}, {6, {2, 1, 2, 1}}, {11, {1, 2, 1, 2}}, {16, {2, 2, 2, 2}}};
  for (const auto& [ell, layers] : rows) {
    EXPECT_EQ(compute_ck(ell, 2, 4), layers) << "ell = " << ell;
    EXPECT_EQ(candidate_order(layers, 2), ell);
  }
}

TEST(ModuloOrder, RoundTripIsIdentity) {
  for (auto [L, K] : std::vector<std::pair<Index, Index>>{{2, 4}, {3, 3}, {3, 4}, {6, 2}}) {
    const std::uint64_t total = layer_count(L, K);
    std::set<std::vector<Index>> seen;
    for (std::uint64_t ell = 1; ell <= total; ++ell) {
      const auto c = compute_ck(ell, L, K);
      ASSERT_EQ(c.size(), static_cast<std::size_t>(K));
      for (Index ck : c) ASSERT_TRUE(ck >= 1 && ck <= L);
      ASSERT_EQ(candidate_order(c, L), ell);
      seen.insert(c);
    }
    EXPECT_EQ(seen.size(), total);
  }
}

TEST(ModuloOrder, AllOnesIsFirst) {
  for (Index L : {1, 2, 5})
    for (Index K : {1, 3, 6}) EXPECT_EQ(candidate_order(std::vector<Index>(static_cast<std::size_t>(K), 1), L), 1u);
}

TEST(ModuloOrder, OutOfRange) {
  EXPECT_THROW(compute_ck(0, 2, 4), std::out_of_range);
  EXPECT_THROW(compute_ck(17, 2, 4), std::out_of_range);
  EXPECT_THROW(candidate_order({1, 3}, 2), std::out_of_range);
  EXPECT_THROW(candidate_order({0, 1}, 2), std::out_of_range);
}

TEST(ModuloOrder, LayerCountSaturates) {
  EXPECT_EQ(layer_count(6, 2), 36u);
  EXPECT_EQ(layer_count(6, 45), UINT64_MAX);
}

TEST(Omp, IdentityExample) {
  Vector y(3);
  y << 0, 5, 0;
  const auto r = omp(SensingMatrix(Matrix::Identity(3, 3)), y, 1);
  EXPECT_EQ(r.support, (Support{1}));
  EXPECT_DOUBLE_EQ(r.coefficients(0), 5.0);
  EXPECT_EQ(r.stats.candidates_per_iteration, (std::vector<std::size_t>{1}));
}

TEST(Omp, OrthogonalColumnsRecoverAnySupport) {
  Rng rng = make_rng(4);
  const Matrix q = Eigen::HouseholderQR<Matrix>(gen_sensing_matrix(16, 16, rng).entries()).householderQ();
  const SensingMatrix a(q.leftCols(10));
  for (Index K = 1; K <= 10; ++K) {
    const SparseSignal x = gen_sparse_signal(10, K, rng);
    EXPECT_EQ(omp(a, a.entries() * x.values, K).support, x.support);
  }
}

TEST(Solvers, RejectBadConfig) {
  const Instance in = noiseless(10, 20, 3, 1);
  EXPECT_THROW(mmp_bf(in.matrix, in.y, config(11, 2)), std::invalid_argument);
  EXPECT_THROW(mmp_bf(in.matrix, in.y, config(3, 21)), std::invalid_argument);
  EXPECT_THROW(mmp_bf(in.matrix, Vector::Zero(9), config(3, 2)), DimensionMismatch);
  auto c = config(3, 2);
  c.epsilon = -1;
  EXPECT_THROW(mmp_df(in.matrix, in.y, c), std::invalid_argument);
  c = config(3, 2);
  c.max_paths = 0;
  EXPECT_THROW(mmp_df(in.matrix, in.y, c), std::invalid_argument);
}

TEST(Solvers, DegenerateCasesMatchOmp) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_rng(seed, {7});
    const SensingMatrix a = gen_sensing_matrix(30, 60, rng);
    const SparseSignal x = gen_sparse_signal(60, 5, rng);
    Vector y = a.entries() * x.values;
    if (seed % 2) y = add_noise(y, 20.0, rng).y;

    const auto o = omp(a, y, 5);
    const auto bf = mmp_bf(a, y, config(5, 1));
    auto dfc = config(5, 3);
    dfc.max_paths = 1;
    const auto df = mmp_df(a, y, dfc);
    ASSERT_EQ(bf.support, o.support);
    ASSERT_EQ(df.support, o.support);
    EXPECT_LE((bf.coefficients - o.coefficients).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((df.coefficients - o.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(MmpBf, MergeCountsOnFrozenInstance) {
  const SensingMatrix a(fixtures::merge_matrix());
  auto c = config(3, 2);
  c.record_trace = true;
  const auto r = mmp_bf(a, fixtures::merge_measurements(), c);
  EXPECT_EQ(r.stats.candidates_per_iteration, (std::vector<std::size_t>{2, 4, 5}));

  auto sorted = [](std::vector<Support> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  ASSERT_EQ(r.stats.trace.size(), 4u);
  EXPECT_EQ(sorted(r.stats.trace[1]), (std::vector<Support>{{1}, {3}}));
  EXPECT_EQ(sorted(r.stats.trace[2]), (std::vector<Support>{{0, 1}, {0, 3}, {1, 4}, {3, 4}}));
  // {2,5,4} (1-based) comes from both {2,5} and {4,5}.
  const auto& last = r.stats.trace[3];
  EXPECT_NE(std::find(last.begin(), last.end(), Support{1, 3, 4}), last.end());

  // Without merging the third layer would hold 8 paths.
  EXPECT_LT(r.stats.candidates_per_iteration[2], 8u);
}

TEST(MmpBf, CandidateGrowthBounded) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance in = noiseless(20, 30, 5, seed);
    for (Index L : {2, 3}) {
      for (std::optional<std::size_t> cap : {std::optional<std::size_t>{}, std::optional<std::size_t>{7}}) {
        auto c = config(5, L);
        c.max_candidates_per_iter = cap;
        const auto r = mmp_bf(in.matrix, in.y, c);
        const auto& counts = r.stats.candidates_per_iteration;
        ASSERT_EQ(counts.size(), 5u);
        std::uint64_t lk = 1;
        for (int k = 1; k <= 5; ++k) {
          lk *= static_cast<std::uint64_t>(L);
          std::uint64_t bound = std::min<std::uint64_t>(lk, choose(30, k));
          if (cap) bound = std::min<std::uint64_t>(bound, *cap);
          EXPECT_GE(counts[static_cast<std::size_t>(k - 1)], 1u);
          EXPECT_LE(counts[static_cast<std::size_t>(k - 1)], bound);
        }
      }
    }
  }
}

TEST(MmpBf, ReturnsBestRetainedPath) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance in = noiseless(15, 25, 4, seed);
    Rng rng = make_rng(seed, {1});
    in.y = add_noise(in.y, 10.0, rng).y;
    auto c = config(4, 3);
    c.record_trace = true;
    const auto r = mmp_bf(in.matrix, in.y, c);
    for (const Support& s : r.stats.trace.back()) {
      const double res = least_squares_project(in.matrix, s, in.y).residual_norm_sq;
      EXPECT_GE(res, r.residual_norm_sq * (1 - 1e-12));
    }
    EXPECT_NEAR(least_squares_project(in.matrix, r.support, in.y).residual_norm_sq, r.residual_norm_sq, 1e-12);
  }
}

// A 20 x 40 Gaussian matrix never meets delta_6 < 1/3 (delta_6 >= delta_2,
// the largest column coherence, which is far above 1/3 here), so the
// guarantee is vacuous at this size. The exhaustive cross-check still holds:
// when breadth-first search returns T its residual is the global minimum.
TEST(MmpBf, TwentyByFortyAgainstExhaustiveSearch) {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance in = noiseless(20, 40, 3, 100 + seed);
    const double d2 = rip_constant(in.matrix, 2);
    EXPECT_GE(d2, bf_recovery_bound(3, 3));

    const auto r = mmp_bf(in.matrix, in.y, config(3, 3));
    double best = INFINITY;
    Support arg;
    for_each_subset(40, 3, [&](const Support& s) {
      const double res = least_squares_project(in.matrix, s, in.y).residual_norm_sq;
      if (res < best) best = res, arg = s;
    });
    EXPECT_EQ(arg, in.x.support);
    EXPECT_GE(r.residual_norm_sq, best - 1e-12 * in.y.squaredNorm());
    if (r.support == in.x.support) {
      ++exact;
      EXPECT_LE(r.residual_norm_sq, 1e-20 * in.y.squaredNorm());
    }
  }
  EXPECT_GE(exact, 4);
}

TEST(MmpBf, RecoversUnderExactDeltaCondition) {
  Rng rng = make_rng(77);
  int tested = 0;
  for (int attempt = 0; attempt < 200 && tested < 20; ++attempt) {
    const SensingMatrix a(incoherent_frame(10, 10, 0.1, rng));
    const Index K = 2, L = 2;
    if (!(rip_constant(a, static_cast<int>(K + L)) < bf_recovery_bound(K, L))) continue;
    ++tested;
    const SparseSignal x = gen_sparse_signal(10, K, rng);
    EXPECT_EQ(mmp_bf(a, a.entries() * x.values, config(K, L)).support, x.support);
  }
  EXPECT_GE(tested, 20);
}

TEST(MmpBf, AllPathsRankDeficientThrowsPartial) {
  Matrix a(2, 3);
  a << 1, 2, 0,
       0, 0, 0;
  Vector y(2);
  y << 1, 0;
  // Every second column is parallel to the first or zero.
  try {
    mmp_bf(SensingMatrix(a), y, config(2, 1));
    FAIL() << "expected PartialRecovery";
  } catch (const PartialRecovery& e) {
    EXPECT_TRUE(e.best().partial);
    EXPECT_LT(e.best().support.size(), 2u);
  }
}

TEST(MmpDf, FirstPathIsOmp) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance in = noiseless(30, 60, 4, seed + 500);
    auto c = config(4, 2);
    c.max_paths = 1;
    const auto df = mmp_df(in.matrix, in.y, c);
    EXPECT_EQ(df.support, omp(in.matrix, in.y, 4).support);
    EXPECT_EQ(df.stats.paths_explored, 1u);
  }
}

TEST(MmpDf, EpsilonStopOnNoiselessInstance) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance in = noiseless(30, 60, 5, seed + 900);
    auto c = config(5, 3);
    c.max_paths = 30;
    c.epsilon = 1e-20;
    const auto r = mmp_df(in.matrix, in.y, c);
    if (r.support == in.x.support) {
      ++hits;
      EXPECT_EQ(r.stats.terminated_by, Termination::epsilon);
      EXPECT_LE(r.residual_norm_sq, 1e-20);
    } else {
      EXPECT_EQ(r.stats.terminated_by, Termination::budget);
      EXPECT_EQ(r.stats.paths_explored, 30u);
    }
  }
  EXPECT_GT(hits, 10);
}

TEST(MmpDf, CompleteWhenAllOrdersTraced) {
  const Instance in = noiseless(10, 12, 2, 3);
  Rng rng = make_rng(3, {2});
  const Vector y = add_noise(in.y, 5.0, rng).y;
  auto c = config(2, 2);
  c.max_paths = 100;
  const auto r = mmp_df(in.matrix, y, c);
  EXPECT_EQ(r.stats.terminated_by, Termination::complete);
  EXPECT_EQ(r.stats.paths_explored, 4u);
}

TEST(MmpDf, BudgetAtPaperScale) {
  const Instance in = noiseless(100, 256, 20, 42);
  Rng rng = make_rng(42, {1});
  const Vector y = add_noise(in.y, 30.0, rng).y;
  auto c = config(20, 6);
  c.max_paths = 50;
  const auto r = mmp_df(in.matrix, y, c);
  EXPECT_LE(r.stats.paths_explored, 50u);
  EXPECT_EQ(r.support.size(), 20u);
}

TEST(OracleLs, NoiselessExact) {
  const Instance in = noiseless(20, 40, 5, 8);
  const auto r = oracle_ls(in.matrix, in.y, in.x.support);
  EXPECT_EQ(r.support, in.x.support);
  for (std::size_t k = 0; k < r.support.size(); ++k)
    EXPECT_NEAR(r.coefficients(static_cast<Index>(k)), in.x.values(r.support[k]), 1e-10);
  EXPECT_LE(r.residual_norm_sq, 1e-20 * in.y.squaredNorm());
}

TEST(OracleLs, NoisyMatchesPseudoInverse) {
  const Instance in = noiseless(20, 40, 4, 9);
  Rng rng = make_rng(9, {1});
  const Measurement meas = add_noise(in.y, 15.0, rng);
  const auto r = oracle_ls(in.matrix, meas.y, in.x.support);

  const Matrix at = in.matrix.columns(in.x.support);
  const Matrix pinv = (at.transpose() * at).inverse() * at.transpose();
  const Vector expected = in.x.values(in.x.support) + pinv * *meas.noise;
  EXPECT_LE((r.coefficients - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(OracleLs, EmptySupport) {
  Vector y(3);
  y << 1, 2, 3;
  const auto r = oracle_ls(SensingMatrix(Matrix::Identity(3, 3)), y, {});
  EXPECT_TRUE(r.support.empty());
  EXPECT_DOUBLE_EQ(r.residual_norm_sq, 14.0);
}
