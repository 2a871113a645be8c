#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "tidk/distributional_kernel.hpp"

using namespace tidk;

namespace {

PointSet pointset(const oracle::Points& p) { return oracle::to_pointset(p); }

std::map<std::uint32_t, std::size_t> cell_histogram(const IsolationKernelModel& m, const oracle::Points& pts) {
  std::map<std::uint32_t, std::size_t> h;
  std::vector<std::uint32_t> active(m.t());
  for (const auto& x : pts) {
    m.cells(x, active);
    for (auto a : active) ++h[a];
  }
  return h;
}

}  // namespace

TEST(EmbedSetIdk, SinglePointEqualsFeatureMap) {
  std::mt19937_64 gen(1);
  const auto pool = oracle::random_points(gen, 40, 2);
  const auto model = fit(pointset(pool), {8, 30, 1});
  const auto x = oracle::random_points(gen, 1, 2);
  const auto v = embed_set_idk(model, pointset(x));
  EXPECT_EQ(v.values, model.feature_map(x[0]).to_dense());
  EXPECT_EQ(v.source_size, 1u);
  EXPECT_EQ(embed_set_idk(model, pointset({x[0], x[0]})).values, v.values);
}

TEST(EmbedSetIdk, CoordinatesBounded) {
  std::mt19937_64 gen(2);
  const auto model = fit(pointset(oracle::random_points(gen, 50, 2)), {8, 40, 2});
  const auto v = embed_set_idk(model, pointset(oracle::random_points(gen, 17, 2)));
  for (double x : v.values) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0 / std::sqrt(40.0) + 1e-15);
  }
}

TEST(EmbedSetIdk, Errors) {
  std::mt19937_64 gen(3);
  const auto model = fit(pointset(oracle::random_points(gen, 10, 2)), {4, 5, 0});
  EXPECT_THROW(embed_set_idk(model, PointSet(2)), InvalidArgument);
  EXPECT_THROW(embed_set_idk(model, pointset(oracle::random_points(gen, 3, 3))), DimensionMismatch);
}

TEST(IdkSimilarity, MatchesDoubleSumOverRandomSets) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<std::size_t> size(1, 50), psi(2, 16), dims(1, 4);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t d = dims(gen);
    const auto pool = oracle::random_points(gen, 60, d);
    const auto model = fit(pointset(pool), {psi(gen), 20, static_cast<std::uint64_t>(trial)});
    const auto s = oracle::random_points(gen, size(gen), d, -0.2, 1.2);
    const auto t = oracle::random_points(gen, size(gen), d, -0.2, 1.2);
    const auto es = embed_set_idk(model, pointset(s));
    const auto et = embed_set_idk(model, pointset(t));
    ASSERT_NEAR(idk_similarity(es, et), oracle::idk_double_sum(model, s, t), 1e-9) << "trial " << trial;
  }
}

TEST(IdkSimilarity, SelfSimilarityAtMostOne) {
  std::mt19937_64 gen(5);
  const auto model = fit(pointset(oracle::random_points(gen, 30, 2)), {4, 25, 5});
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = embed_set_idk(model, pointset(oracle::random_points(gen, 1 + trial, 2)));
    const double self = idk_similarity(v, v);
    EXPECT_GT(self, 0.0);
    EXPECT_LE(self, 1.0 + 1e-12);
    EXPECT_NEAR(normalized_similarity(v, v), 1.0, 1e-12);
  }
}

TEST(IdkSimilarity, DisjointCellsGiveZero) {
  // Two far-apart clusters with psi = 2 and exhaustive sampling: each cluster
  // owns one center in every partitioning.
  PointSet pool(1);
  pool.push_back(std::vector<double>{0.0});
  pool.push_back(std::vector<double>{100.0});
  const auto model = fit(pool, {2, 10, 0});
  const auto a = embed_set_idk(model, pointset({{0.0}, {1.0}}));
  const auto b = embed_set_idk(model, pointset({{99.0}, {100.0}, {101.0}}));
  EXPECT_EQ(idk_similarity(a, b), 0.0);
  EXPECT_EQ(normalized_similarity(a, b), 0.0);
  EXPECT_GT(kernel_distance(a, b), 0.0);
}

TEST(IdkSimilarity, IncompatibleVectorsRejected) {
  MeanMapVector a{{1, 0}, 1, KernelKind::idk};
  MeanMapVector b{{1, 0, 0}, 1, KernelKind::idk};
  MeanMapVector c{{1, 0}, 1, KernelKind::gdk_nystrom};
  EXPECT_THROW(idk_similarity(a, b), DimensionMismatch);
  EXPECT_THROW(idk_similarity(a, c), InvalidArgument);
}

TEST(NormalizedSimilarity, ScaleInvariantAndZeroRejected) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    MeanMapVector a{std::vector<double>(10), 1, KernelKind::idk}, b = a;
    for (auto& v : a.values) v = u(gen);
    for (auto& v : b.values) v = u(gen);
    auto scaled = a;
    const double c = 0.01 + 10 * u(gen);
    for (auto& v : scaled.values) v *= c;
    EXPECT_NEAR(normalized_similarity(scaled, b), normalized_similarity(a, b), 1e-12);
  }
  MeanMapVector zero{std::vector<double>(3, 0.0), 1, KernelKind::idk};
  MeanMapVector one{{1, 0, 0}, 1, KernelKind::idk};
  EXPECT_THROW(normalized_similarity(zero, one), InvalidArgument);
}

TEST(Injectivity, EqualEmbeddingsIffEqualCellHistograms) {
  std::mt19937_64 gen(7);
  const auto pool = oracle::random_points(gen, 30, 2);
  const auto model = fit(pointset(pool), {3, 4, 7});
  std::uniform_int_distribution<std::size_t> len(1, 4);
  int equal_pairs = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto s = oracle::random_points(gen, len(gen), 2);
    const auto t = oracle::random_points(gen, len(gen), 2);
    const auto hs = cell_histogram(model, s), ht = cell_histogram(model, t);
    const bool same_mean = s.size() == t.size() && hs == ht;
    // Histograms normalized by size decide equality of the mean maps.
    bool same_normalized = true;
    std::map<std::uint32_t, int> keys;
    for (auto [k, c] : hs) keys[k] = 0;
    for (auto [k, c] : ht) keys[k] = 0;
    for (auto [k, z] : keys) {
      const double a = hs.count(k) ? static_cast<double>(hs.at(k)) / static_cast<double>(s.size()) : 0.0;
      const double b = ht.count(k) ? static_cast<double>(ht.at(k)) / static_cast<double>(t.size()) : 0.0;
      if (std::abs(a - b) > 1e-12) same_normalized = false;
    }
    const auto es = embed_set_idk(model, pointset(s)).values;
    const auto et = embed_set_idk(model, pointset(t)).values;
    bool equal = true;
    for (std::size_t i = 0; i < es.size(); ++i) equal &= std::abs(es[i] - et[i]) < 1e-12;
    EXPECT_EQ(equal, same_normalized);
    if (same_mean) EXPECT_TRUE(equal);
    equal_pairs += equal;
  }
  EXPECT_GT(equal_pairs, 0);  // the coarse model makes collisions reachable
}

TEST(Injectivity, SeparatedSetsHavePositiveDistance) {
  std::mt19937_64 gen(8);
  auto left = oracle::random_points(gen, 40, 2, 0, 1);
  auto right = oracle::random_points(gen, 40, 2, 5, 6);
  auto pool = left;
  pool.insert(pool.end(), right.begin(), right.end());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = fit(pointset(pool), {8, 50, seed});
    EXPECT_GT(kernel_distance(embed_set_idk(model, pointset(left)), embed_set_idk(model, pointset(right))), 0.0);
  }
}

TEST(Nystrom, FullRankIsExactOnFitPoints) {
  std::mt19937_64 gen(9);
  const auto pool = oracle::random_points(gen, 30, 2);
  const auto map = gdk_fit_nystrom(pointset(pool), {2.0, 30, 0, 1});
  EXPECT_EQ(map.landmark_count(), 30u);
  for (const auto& x : pool) {
    const auto zx = map.feature(x);
    EXPECT_NEAR(dot(zx, zx), 1.0, 1e-6);
    for (const auto& y : pool) {
      const double d = oracle::dist(x, y);
      EXPECT_NEAR(dot(zx, map.feature(y)), std::exp(-2.0 * d * d), 1e-6);
    }
  }
}

TEST(Nystrom, SetSimilarityMatchesDoubleSum) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_points(gen, 20, 2);
    const auto t = oracle::random_points(gen, 20, 2);
    auto pool = s;
    pool.insert(pool.end(), t.begin(), t.end());
    const double gamma = 0.5 + trial * 0.25;
    const auto map = gdk_fit_nystrom(pointset(pool), {gamma, pool.size(), 0, static_cast<std::uint64_t>(trial)});
    const auto es = embed_set_gdk(map, pointset(s));
    const auto et = embed_set_gdk(map, pointset(t));
    EXPECT_NEAR(dot(es.values, et.values), oracle::gdk_double_sum(gamma, s, t), 0.01);
    EXPECT_NEAR(dot(es.values, es.values), oracle::gdk_double_sum(gamma, s, s), 0.01);
  }
}

TEST(Nystrom, SingleAndDuplicatePoints) {
  std::mt19937_64 gen(11);
  const auto pool = oracle::random_points(gen, 25, 3);
  const auto map = gdk_fit_nystrom(pointset(pool), {});
  const auto single = embed_set_gdk(map, pointset({pool[3]}));
  EXPECT_EQ(single.values, map.feature(pool[3]));
  const auto dup = embed_set_gdk(map, pointset({pool[3], pool[3]}));
  for (std::size_t i = 0; i < dup.values.size(); ++i) EXPECT_NEAR(dup.values[i], single.values[i], 1e-12);
}

TEST(Nystrom, SymmetricAndBounded) {
  std::mt19937_64 gen(12);
  const auto pool = oracle::random_points(gen, 60, 2);
  const auto map = gdk_fit_nystrom(pointset(pool), {1.0, 60, 0, 3});
  std::uniform_int_distribution<std::size_t> len(1, 10);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = embed_set_gdk(map, pointset(oracle::random_points(gen, len(gen), 2)));
    const auto b = embed_set_gdk(map, pointset(oracle::random_points(gen, len(gen), 2)));
    const double ab = idk_similarity(a, b);
    EXPECT_EQ(ab, idk_similarity(b, a));
    EXPECT_GT(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-6);
  }
}

TEST(Nystrom, MedianHeuristicAndDeterminism) {
  PointSet pts(1);
  for (double v : {0.0, 1.0, 3.0}) pts.push_back(std::vector<double>{v});
  // Pairwise distances 1, 2, 3: median 2.
  EXPECT_DOUBLE_EQ(median_heuristic_gamma(pts, 0), 1.0 / 8.0);
  const auto a = gdk_fit_nystrom(pts, {});
  EXPECT_DOUBLE_EQ(a.gamma(), 1.0 / 8.0);
  std::mt19937_64 gen(13);
  const auto pool = pointset(oracle::random_points(gen, 80, 2));
  const auto m1 = gdk_fit_nystrom(pool, {0.0, 20, 10, 5});
  const auto m2 = gdk_fit_nystrom(pool, {0.0, 20, 10, 5});
  EXPECT_EQ(m1.to_json(), m2.to_json());
  EXPECT_EQ(m1.feature_dimension(), 10u);
}

TEST(Nystrom, RejectsBadParams) {
  PointSet pts(1);
  pts.push_back(std::vector<double>{0.0});
  EXPECT_THROW(gdk_fit_nystrom(PointSet(1), {}), InsufficientPoints);
  EXPECT_THROW(gdk_fit_nystrom(pts, {1.0, 0, 0, 0}), InvalidArgument);
  EXPECT_THROW(gdk_fit_nystrom(pts, {1.0, 4, 2, 0}), InvalidArgument);
}

TEST(FittedKernel, MapPointAgreesWithEmbed) {
  std::mt19937_64 gen(14);
  const auto pool = oracle::random_points(gen, 40, 2);
  for (auto kind : {KernelKind::idk, KernelKind::gdk_nystrom}) {
    const auto k = FittedKernel::fit(pointset(pool), kind, {8, 20, 1}, {});
    std::vector<double> dense(k.feature_dimension(), 0.0);
    k.map_point(pool[5], dense);
    EXPECT_EQ(k.embed(pointset({pool[5]})).values, dense);
    EXPECT_EQ(k.embed(pointset({pool[5]})).kernel, kind);
  }
}
