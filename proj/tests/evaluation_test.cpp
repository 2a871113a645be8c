#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tidk/baselines.hpp"
#include "tidk/evaluation.hpp"
#include "tidk/synthetic.hpp"

using namespace tidk;

namespace {

std::vector<int> random_labels(std::mt19937_64& gen, std::size_t n, int classes) {
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

std::vector<int> rename(const std::vector<int>& v, std::mt19937_64& gen) {
  std::vector<int> names(64);
  std::iota(names.begin(), names.end(), 100);
  std::shuffle(names.begin(), names.end(), gen);
  std::vector<int> out;
  for (int x : v) out.push_back(names[static_cast<std::size_t>(x)]);
  return out;
}

ScoreMatrix block_similarity(const std::vector<int>& labels) {
  const std::size_t n = labels.size();
  ScoreMatrix m{n, std::vector<double>(n * n), true};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.values[i * n + j] = labels[i] == labels[j] ? 0.5 + 0.01 * double(j) : 0.0;
  return m;
}

}  // namespace

TEST(Nmi, Examples) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(nmi(truth, truth), 1.0);
  EXPECT_DOUBLE_EQ(nmi(truth, {5, 5, 3, 3, 9, 9}), 1.0);
  EXPECT_NEAR(nmi({0, 0, 1, 1}, {0, 1, 0, 1}), 0.0, 1e-15);
  EXPECT_EQ(nmi({1, 1, 1}, {4, 4, 4}), 1.0);
  EXPECT_EQ(nmi({1, 1, 1}, {1, 2, 3}), 0.0);
}

TEST(Nmi, Errors) {
  EXPECT_THROW(nmi({}, {}), InvalidArgument);
  EXPECT_THROW(nmi({1, 2}, {1}), InvalidArgument);
}

TEST(Ari, Examples) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(ari(truth, truth), 1.0);
  EXPECT_DOUBLE_EQ(ari(truth, {7, 7, 1, 1, 4, 4}), 1.0);
  // Pairs: same-truth {01,23}, same-pred {02,13}, agreement 0; E = 2*2/6.
  const double expected = 2.0 * 2.0 / 6.0;
  EXPECT_NEAR(ari({0, 0, 1, 1}, {0, 1, 0, 1}), (0.0 - expected) / (2.0 - expected), 1e-15);
  EXPECT_NEAR(ari({0, 0, 1, 1}, {0, 1, 0, 1}), oracle::ari({0, 0, 1, 1}, {0, 1, 0, 1}), 1e-15);
  EXPECT_THROW(ari({1}, {1}), InvalidArgument);
  EXPECT_THROW(ari({1, 2}, {1}), InvalidArgument);
}

TEST(Metrics, MatchBruteForceOnRandomLabels) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  std::uniform_int_distribution<int> classes(1, 6);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = size(gen);
    const auto u = random_labels(gen, n, classes(gen));
    const auto v = random_labels(gen, n, classes(gen));
    const double m = nmi(u, v), a = ari(u, v);
    EXPECT_NEAR(m, oracle::nmi(u, v), 1e-12);
    EXPECT_NEAR(a, oracle::ari(u, v), 1e-12);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
    EXPECT_LE(a, 1.0);
    // Relabeling either side changes nothing.
    EXPECT_EQ(nmi(rename(u, gen), rename(v, gen)), nmi(u, v));
    EXPECT_EQ(ari(rename(u, gen), v), a);
    EXPECT_NEAR(nmi(v, u), m, 1e-12);
  }
}

TEST(Ari, RandomShufflesAverageNearZero) {
  std::mt19937_64 gen(2);
  std::vector<int> truth(100);
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = static_cast<int>(i % 4);
  double mean = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto pred = truth;
    std::shuffle(pred.begin(), pred.end(), gen);
    mean += ari(truth, pred) / 1000;
  }
  EXPECT_LT(std::abs(mean), 0.05);
}

TEST(PrecisionAtK, DuplicatesGiveOne) {
  const std::vector<int> labels(6, 3);
  ScoreMatrix m{6, std::vector<double>(36, 0.7), true};
  const auto curve = precision_at_k(m, labels, {1, 3, 5});
  EXPECT_EQ(curve.ks, (std::vector<std::size_t>{1, 3, 5}));
  for (double p : curve.precision) EXPECT_EQ(p, 1.0);
}

TEST(PrecisionAtK, PerfectSeparation) {
  const std::vector<int> labels{0, 0, 0, 0, 1, 1, 1, 1};
  const auto curve = precision_at_k(block_similarity(labels), labels, {3, 2, 1, 3});
  EXPECT_EQ(curve.ks, (std::vector<std::size_t>{1, 2, 3}));
  for (double p : curve.precision) EXPECT_EQ(p, 1.0);
}

TEST(PrecisionAtK, BoundBeyondClassSize) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<int> labels{0, 0, 0, 1, 1, 1, 1, 1, 2, 2};
  ScoreMatrix m{10, std::vector<double>(100), true};
  for (auto& v : m.values) v = u(gen);
  std::vector<std::size_t> ks{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto curve = precision_at_k(m, labels, ks);
  for (std::size_t c = 0; c < ks.size(); ++c) {
    double bound = 0;
    for (int l : labels) {
      const auto size = static_cast<double>(std::count(labels.begin(), labels.end(), l));
      bound += std::min(1.0, (size - 1) / static_cast<double>(ks[c])) / 10;
    }
    EXPECT_LE(curve.precision[c], bound + 1e-12);
    EXPECT_GE(curve.precision[c], 0.0);
  }
}

TEST(PrecisionAtK, MatchesBruteForceAndMonotoneInvariance) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> coarse(0, 4);  // many ties
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 12;
    const auto labels = random_labels(gen, n, 3);
    ScoreMatrix m{n, std::vector<double>(n * n), trial % 2 == 0};
    for (auto& v : m.values) v = coarse(gen);
    const std::vector<std::size_t> ks{1, 4, 11};
    const auto curve = precision_at_k(m, labels, ks, 2);
    for (std::size_t c = 0; c < ks.size(); ++c) {
      double expected = 0;
      for (std::size_t q = 0; q < n; ++q) {
        // Selection by repeated extraction of the best remaining neighbour.
        std::vector<bool> used(n, false);
        used[q] = true;
        std::size_t same = 0;
        for (std::size_t r = 0; r < ks[c]; ++r) {
          std::size_t best = n;
          for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            if (best == n) {
              best = j;
              continue;
            }
            const double sj = m(q, j), sb = m(q, best);
            if (m.higher_is_closer ? sj > sb : sj < sb) best = j;
          }
          used[best] = true;
          same += labels[best] == labels[q];
        }
        expected += static_cast<double>(same) / static_cast<double>(ks[c]) / static_cast<double>(n);
      }
      EXPECT_NEAR(curve.precision[c], expected, 1e-12);
    }
    auto transformed = m;
    for (auto& v : transformed.values) v = std::exp(3 * v) - 7;
    EXPECT_EQ(precision_at_k(transformed, labels, ks).precision, curve.precision);
  }
}

TEST(PrecisionAtK, Errors) {
  ScoreMatrix m{3, std::vector<double>(9, 0.0), true};
  EXPECT_THROW(precision_at_k(m, {0, 0, 1}, {3}), InvalidArgument);
  EXPECT_THROW(precision_at_k(m, {0, 0, 1}, {0}), InvalidArgument);
  EXPECT_THROW(precision_at_k(m, {0, 0}, {1}), InvalidArgument);
  EXPECT_THROW(precision_at_k(m, {0, 0, 1}, {}), InvalidArgument);
}

TEST(PrecisionAtK, DistanceMatrixInput) {
  const TrajectoryDataset ds({oracle::trajectory({{0.0}}, "a"), oracle::trajectory({{0.1}}, "b"),
                              oracle::trajectory({{5.0}}, "c"), oracle::trajectory({{5.2}}, "d")});
  const auto curve = precision_at_k(ScoreMatrix::distances(pairwise_matrix(ds, Measure::hausdorff)), {0, 0, 1, 1}, {1, 2});
  EXPECT_EQ(curve.precision[0], 1.0);
  EXPECT_EQ(curve.precision[1], 0.5);
}

TEST(SamplingSweep, ShapeAndRateOneRow) {
  const auto ds = generate_synthetic(separated_lines_spec(3, 15, 0.2), 5);
  TidkcParams p;
  p.k = 3;
  p.rng_seed = 5;
  const auto prepare = [](const TrajectoryDataset& d) { return min_max_normalize(d); };
  const auto rows = run_sampling_sweep(ds, {1.0, 0.5, 0.3}, DownsampleSelection::all, p, prepare, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].rate, 1.0);
  const auto direct = cluster(min_max_normalize(ds), p);
  EXPECT_EQ(rows[0].nmi, nmi(ds.labels(), direct.labels));
  for (const auto& r : rows) EXPECT_GE(r.nmi, 0.9);
  const auto half = run_sampling_sweep(ds, {1.0, 0.3}, DownsampleSelection::half_per_cluster, p, prepare, 1);
  ASSERT_EQ(half.size(), 2u);
  EXPECT_EQ(half[0].selection, DownsampleSelection::half_per_cluster);
  EXPECT_GE(half[1].nmi, 0.9);
}

TEST(SamplingSweep, NeedsLabels) {
  const TrajectoryDataset ds({oracle::trajectory({{0.0}, {1.0}}, "a"), oracle::trajectory({{2.0}}, "b")});
  EXPECT_THROW(run_sampling_sweep(ds, {1.0}, DownsampleSelection::all, TidkcParams{}), MissingLabels);
}
