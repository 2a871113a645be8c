#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tidk/isolation_kernel.hpp"

using namespace tidk;

namespace {

PointSet uniform_pointset(std::uint64_t seed, std::size_t n, std::size_t d) {
  std::mt19937_64 gen(seed);
  return oracle::to_pointset(oracle::random_points(gen, n, d));
}

std::vector<double> center_vec(const IsolationKernelModel& m, std::size_t j, std::size_t c) {
  const auto s = m.center(j, c);
  return {s.begin(), s.end()};
}

}  // namespace

TEST(IKFit, CentersFollowParams) {
  const auto pts = uniform_pointset(1, 100, 2);
  const auto model = fit(pts, {4, 10, 7});
  EXPECT_EQ(model.t(), 10u);
  EXPECT_EQ(model.psi(), 4u);
  EXPECT_EQ(model.feature_dimension(), 40u);
  const auto fit_points = oracle::to_points(pts);
  const std::set<std::vector<double>> pool(fit_points.begin(), fit_points.end());
  for (std::size_t j = 0; j < 10; ++j) {
    std::set<std::vector<double>> block;
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_TRUE(pool.count(center_vec(model, j, c)));
      block.insert(center_vec(model, j, c));
    }
    EXPECT_EQ(block.size(), 4u);  // without replacement
  }
}

TEST(IKFit, PsiEqualToSetSizeUsesEveryPoint) {
  const auto pts = uniform_pointset(2, 12, 3);
  const auto model = fit(pts, {12, 5, 3});
  const auto fit_points = oracle::to_points(pts);
  const std::set<std::vector<double>> pool(fit_points.begin(), fit_points.end());
  for (std::size_t j = 0; j < 5; ++j) {
    std::set<std::vector<double>> block;
    for (std::size_t c = 0; c < 12; ++c) block.insert(center_vec(model, j, c));
    EXPECT_EQ(block, pool);
  }
}

TEST(IKFit, DeterministicGivenSeed) {
  const auto pts = uniform_pointset(3, 50, 2);
  EXPECT_EQ(fit(pts, {8, 20, 11}), fit(pts, {8, 20, 11}));
  EXPECT_FALSE(fit(pts, {8, 20, 11}) == fit(pts, {8, 20, 12}));
}

TEST(IKFit, RejectsBadParams) {
  const auto pts = uniform_pointset(4, 5, 2);
  EXPECT_THROW(fit(pts, {6, 10, 0}), InsufficientPoints);
  EXPECT_THROW(fit(pts, {1, 10, 0}), InvalidArgument);
  EXPECT_THROW(fit(pts, {2, 0, 0}), InvalidArgument);
}

TEST(IKFeatureMap, CenterActivatesItsOwnCell) {
  const auto model = fit(uniform_pointset(5, 30, 2), {6, 15, 1});
  for (std::size_t j = 0; j < model.t(); ++j)
    for (std::size_t c = 0; c < model.psi(); ++c) EXPECT_EQ(model.cell(j, model.center(j, c)), c);
}

TEST(IKFeatureMap, NearerCenterWins) {
  PointSet pts(2);
  pts.push_back(std::vector<double>{0, 0});
  pts.push_back(std::vector<double>{10, 10});
  const auto model = fit(pts, {2, 1, 0});
  const std::vector<double> x{1, 1};
  const auto phi = model.feature_map(x);
  ASSERT_EQ(phi.active.size(), 1u);
  const auto winner = model.center(0, phi.active[0]);
  EXPECT_EQ(winner[0], 0.0);
  EXPECT_EQ(winner[1], 0.0);
}

TEST(IKFeatureMap, TiesGoToLowestCenterIndex) {
  PointSet pts(1);
  for (double v : {-1.0, 1.0, 5.0}) pts.push_back(std::vector<double>{v});
  const auto model = fit(pts, {3, 30, 9});
  const std::vector<double> midpoint{0.0};
  for (std::size_t j = 0; j < model.t(); ++j) {
    std::size_t lo = model.psi(), hi = model.psi();
    for (std::size_t c = 0; c < model.psi(); ++c) {
      if (model.center(j, c)[0] == -1.0) lo = c;
      if (model.center(j, c)[0] == 1.0) hi = c;
    }
    EXPECT_EQ(model.cell(j, midpoint), std::min(lo, hi));
  }
}

TEST(IKFeatureMap, ShapeAndNorm) {
  const auto model = fit(uniform_pointset(6, 80, 3), {8, 25, 2});
  std::mt19937_64 gen(6);
  for (const auto& x : oracle::random_points(gen, 50, 3, -0.5, 1.5)) {
    const auto phi = model.feature_map(x);
    ASSERT_EQ(phi.active.size(), model.t());
    for (std::size_t j = 0; j < model.t(); ++j) {
      EXPECT_GE(phi.active[j], j * model.psi());
      EXPECT_LT(phi.active[j], (j + 1) * model.psi());
      EXPECT_EQ(phi.active[j] - j * model.psi(), oracle::cell(model, j, x));
    }
    const auto dense = phi.to_dense();
    double norm2 = 0;
    std::size_t nonzero = 0;
    for (double v : dense) {
      norm2 += v * v;
      nonzero += v != 0.0;
    }
    EXPECT_EQ(nonzero, model.t());
    EXPECT_NEAR(norm2, 1.0, 1e-12);
  }
}

TEST(IKFeatureMap, HighDimensionalPathMatchesOracle) {
  // dims > 8 takes the expanded-norm distance path.
  const auto model = fit(uniform_pointset(7, 60, 12), {16, 20, 5});
  std::mt19937_64 gen(7);
  for (const auto& x : oracle::random_points(gen, 40, 12))
    for (std::size_t j = 0; j < model.t(); ++j) EXPECT_EQ(model.cell(j, x), oracle::cell(model, j, x));
}

TEST(IKFeatureMap, DimensionMismatch) {
  const auto model = fit(uniform_pointset(8, 10, 2), {4, 3, 0});
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(model.feature_map(x), DimensionMismatch);
  EXPECT_THROW(ik_similarity(model, x, x), DimensionMismatch);
}

TEST(IKSimilarity, MatchesSharedCellCount) {
  std::mt19937_64 gen(9);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = fit(uniform_pointset(100 + seed, 40, 2), {5, 17, seed});
    const auto probes = oracle::random_points(gen, 10, 2);
    for (const auto& x : probes)
      for (const auto& y : probes) {
        const double k = ik_similarity(model, x, y);
        EXPECT_NEAR(k, oracle::ik(model, x, y), 1e-12);
        const double count = k * static_cast<double>(model.t());
        EXPECT_NEAR(count, std::round(count), 1e-9);
      }
  }
}

TEST(IKSimilarity, BoundsSymmetryAndSelf) {
  const auto model = fit(uniform_pointset(10, 64, 2), {8, 50, 3});
  std::mt19937_64 gen(10);
  const auto probes = oracle::random_points(gen, 25, 2, -1, 2);
  for (const auto& x : probes) {
    EXPECT_DOUBLE_EQ(ik_similarity(model, x, x), 1.0);
    for (const auto& y : probes) {
      const double k = ik_similarity(model, x, y);
      EXPECT_GE(k, 0.0);
      EXPECT_LE(k, 1.0 + 1e-12);
      EXPECT_EQ(k, ik_similarity(model, y, x));
    }
  }
}

TEST(IKSimilarity, SinglePartitioningIsBinary) {
  const auto model = fit(uniform_pointset(11, 20, 2), {2, 1, 4});
  std::mt19937_64 gen(11);
  const auto probes = oracle::random_points(gen, 30, 2);
  for (const auto& x : probes)
    for (const auto& y : probes) {
      const double k = ik_similarity(model, x, y);
      EXPECT_TRUE(k == 0.0 || k == 1.0);
    }
}

TEST(IKSimilarity, SparseRegionPairsAreMoreSimilar) {
  // Dense blob near the origin, sparse blob near (10, 0); probe pairs have the
  // same Euclidean separation in both.
  std::mt19937_64 gen(12);
  std::normal_distribution<double> dense(0.0, 0.1), sparse(0.0, 1.0);
  PointSet pts(2);
  for (int i = 0; i < 400; ++i) pts.push_back(std::vector<double>{dense(gen), dense(gen)});
  for (int i = 0; i < 100; ++i) pts.push_back(std::vector<double>{10 + sparse(gen), sparse(gen)});
  const std::vector<double> d1{-0.05, 0}, d2{0.05, 0}, s1{9.95, 0}, s2{10.05, 0};
  double dense_mean = 0, sparse_mean = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto model = fit(pts, {16, 100, static_cast<std::uint64_t>(seed)});
    dense_mean += ik_similarity(model, d1, d2) / seeds;
    sparse_mean += ik_similarity(model, s1, s2) / seeds;
  }
  EXPECT_GT(sparse_mean - dense_mean, 0.0) << "dense=" << dense_mean << " sparse=" << sparse_mean;
}

TEST(IKModel, JsonRoundTrip) {
  const auto model = fit(uniform_pointset(13, 30, 3), {6, 12, 99});
  const auto restored = IsolationKernelModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  EXPECT_EQ(restored, model);
  std::mt19937_64 gen(13);
  for (const auto& x : oracle::random_points(gen, 20, 3))
    EXPECT_EQ(restored.feature_map(x).active, model.feature_map(x).active);

  const auto path = std::filesystem::temp_directory_path() / "tidk_ik_model_test.json";
  save_model(path, model);
  EXPECT_EQ(load_model(path), model);
  std::filesystem::remove(path);

  auto bad = model.to_json();
  bad["version"] = 2;
  EXPECT_THROW(IsolationKernelModel::from_json(bad), InvalidArgument);
}
