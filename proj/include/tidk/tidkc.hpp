#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "tidk/data_model.hpp"
#include "tidk/distributional_kernel.hpp"
#include "tidk/error.hpp"
#include "tidk/isolation_kernel.hpp"
#include "tidk/parallel.hpp"
#include "tidk/random.hpp"

namespace tidk {

/// Parameters of the two-level distributional kernel clustering. The
/// rng_seed fields inside level1/level2/gdk1/gdk2 are ignored: every stage
/// seed is derived from `rng_seed`.
struct TidkcParams {
  std::size_t k = 2;
  double rho = 0.9;
  double tau_floor = 1e-5;
  IKParams level1{16, 100, 0};
  IKParams level2{4, 100, 0};
  std::size_t seed_subset_s = 1000;  // effective subset size is min(n, s)
  std::size_t knn_for_contrast = 10;
  KernelKind kernel1 = KernelKind::idk;
  KernelKind kernel2 = KernelKind::idk;
  GDKParams gdk1{};
  GDKParams gdk2{};
  std::uint64_t rng_seed = 0;
  std::size_t threads = 1;

  void validate() const {
    if (k < 2) throw InvalidArgument("k must be >= 2");
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
    if (!(tau_floor > 0.0)) throw InvalidArgument("tau_floor must be > 0");
    if (knn_for_contrast < 1) throw InvalidArgument("knn_for_contrast must be >= 1");
    if (seed_subset_s < 1) throw InvalidArgument("seed_subset_s must be >= 1");
    level1.validate();
    level2.validate();
  }
};

namespace detail {
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kLevel1 = 1, kLevel2 = 2, kSubsample = 3 };

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}
}  // namespace detail

namespace detail {
inline FittedKernel fit_level1(const TrajectoryDataset& ds, const TidkcParams& params) {
  IKParams ik = params.level1;
  ik.rng_seed = derive_seed(params.rng_seed, kLevel1);
  GDKParams gdk = params.gdk1;
  gdk.rng_seed = ik.rng_seed;
  return FittedKernel::fit(ds.pooled_points(), params.kernel1, ik, gdk);
}

inline PointSet as_points(const std::vector<MeanMapVector>& g) {
  if (g.empty()) throw InvalidArgument("level-2 mapping of an empty set");
  const std::size_t dim1 = g.front().dimension();
  std::vector<double> coords;
  coords.reserve(g.size() * dim1);
  for (const auto& v : g) {
    if (v.dimension() != dim1) throw DimensionMismatch(dim1, v.dimension(), "level-1 point");
    coords.insert(coords.end(), v.values.begin(), v.values.end());
  }
  return PointSet(dim1, std::move(coords));
}

inline FittedKernel fit_level2(const PointSet& g_points, const TidkcParams& params) {
  IKParams ik = params.level2;
  ik.rng_seed = derive_seed(params.rng_seed, kLevel2);
  GDKParams gdk = params.gdk2;
  gdk.rng_seed = ik.rng_seed;
  return FittedKernel::fit(g_points, params.kernel2, ik, gdk);
}
}  // namespace detail

/// G = {g_i}: level-1 mean map of every trajectory, kernel fit on the pooled points.
inline std::vector<MeanMapVector> embed_level1(const TrajectoryDataset& ds, const TidkcParams& params) {
  if (ds.empty()) throw InvalidArgument("cannot embed an empty dataset");
  return embed_all(detail::fit_level1(ds, params), ds, params.threads);
}

/// Dense level-2 feature vectors f(g) of every level-1 point, so that
/// K2(delta(g), P_C) = <f(g), mean of f over C>.
class Level2Space {
 public:
  Level2Space(std::size_t n, std::size_t dimension) : n_(n), dim_(dimension), features_(n * dimension, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return dim_; }
  std::span<const double> operator[](std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {features_.data() + i * dim_, dim_}; }

 private:
  std::size_t n_, dim_;
  std::vector<double> features_;
};

inline Level2Space apply_level2(const FittedKernel& kernel, const PointSet& g_points, std::size_t threads = 1) {
  Level2Space space(g_points.size(), kernel.feature_dimension());
  parallel_for(g_points.size(), threads, [&](std::size_t i) { kernel.map_point(g_points[i], space.row(i)); });
  return space;
}

/// Fits the level-2 kernel on G (Euclidean geometry of the level-1 feature
/// space) and maps every g through it.
inline Level2Space map_level2(const std::vector<MeanMapVector>& g, const TidkcParams& params) {
  const auto points = detail::as_points(g);
  return apply_level2(detail::fit_level2(points, params), points, params.threads);
}

/// k seeds by local contrast on a uniform subsample of size min(n, s).
///
/// density(g) = K2(delta(g), P_subsample), and LC(g) counts the knn nearest
/// subsample neighbours (kernel-induced distance, lower index on ties) with
/// strictly lower density. Points are put in peak order (LC, then density, then
/// lower index); each point's separation is its kernel distance to the nearest
/// point earlier in that order. Seeds are the k largest (1 + LC) * separation,
/// peak order breaking ties. A local peak far from every stronger peak scores
/// high; a second peak inside the same cluster has a small separation.
inline std::vector<std::size_t> select_seeds(const Level2Space& space, std::size_t k, std::size_t s, std::size_t knn,
                                             std::uint64_t rng_seed) {
  const std::size_t n = space.size();
  if (k == 0 || n < k) throw InvalidArgument("select_seeds needs 1 <= k <= |G|");
  const std::size_t subset = std::min(n, std::max(s, k));
  std::vector<std::size_t> members;
  if (subset == n) {
    members.resize(n);
    std::iota(members.begin(), members.end(), std::size_t{0});
  } else {
    Rng rng(rng_seed);
    members = rng.sample_without_replacement(n, subset);
    std::sort(members.begin(), members.end());
  }

  const std::size_t dim = space.dimension();
  std::vector<double> mean(dim, 0.0);
  for (auto i : members)
    for (std::size_t a = 0; a < dim; ++a) mean[a] += space[i][a];
  for (auto& v : mean) v /= static_cast<double>(subset);

  std::vector<double> gram(subset * subset);
  for (std::size_t a = 0; a < subset; ++a)
    for (std::size_t b = a; b < subset; ++b)
      gram[a * subset + b] = gram[b * subset + a] = dot(space[members[a]], space[members[b]]);

  std::vector<double> density(subset);
  for (std::size_t a = 0; a < subset; ++a) density[a] = dot(space[members[a]], mean);

  const std::size_t neighbours = std::min(knn, subset - 1);
  std::vector<std::size_t> contrast(subset, 0);
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < subset; ++a) {
    order.clear();
    for (std::size_t b = 0; b < subset; ++b)
      if (b != a) order.push_back(b);
    auto dist2 = [&](std::size_t b) { return gram[a * subset + a] + gram[b * subset + b] - 2.0 * gram[a * subset + b]; };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(neighbours), order.end(),
                      [&](std::size_t x, std::size_t y) {
                        const double dx = dist2(x), dy = dist2(y);
                        return dx != dy ? dx < dy : x < y;
                      });
    for (std::size_t r = 0; r < neighbours; ++r) contrast[a] += density[order[r]] < density[a];
  }

  // Peak order: LC, then density, then lower index.
  std::vector<std::size_t> rank(subset);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  auto precedes = [&](std::size_t x, std::size_t y) {
    if (contrast[x] != contrast[y]) return contrast[x] > contrast[y];
    if (density[x] != density[y]) return density[x] > density[y];
    return x < y;
  };
  std::sort(rank.begin(), rank.end(), precedes);

  // separation: distance to the nearest point earlier in peak order; the first
  // point takes its largest distance to anyone.
  std::vector<double> separation(subset, 0.0);
  for (std::size_t r = 0; r < subset; ++r) {
    const std::size_t a = rank[r];
    double best = r == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < (r == 0 ? subset : r); ++q) {
      const std::size_t b = rank[q];
      const double d = std::sqrt(std::max(0.0, gram[a * subset + a] + gram[b * subset + b] - 2.0 * gram[a * subset + b]));
      best = r == 0 ? std::max(best, d) : std::min(best, d);
    }
    separation[a] = best;
  }

  std::vector<double> score(subset);
  for (std::size_t a = 0; a < subset; ++a) score[a] = (1.0 + static_cast<double>(contrast[a])) * separation[a];
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t x, std::size_t y) { return score[x] > score[y]; });

  std::vector<std::size_t> seeds;
  for (std::size_t r = 0; r < k; ++r) seeds.push_back(members[rank[r]]);
  return seeds;
}

struct GrowthStep {
  double tau = 0.0;
  std::size_t assigned = 0;  // total assigned after this iteration, seeds included
};

/// Partial assignment of G to k growing clusters. assignment[i] is 0 for
/// unassigned points, otherwise the cluster id in [1, k].
struct ClusterState {
  std::vector<int> assignment;
  std::vector<std::size_t> seeds;
  std::vector<std::vector<double>> sums;   // per-cluster sum of member features
  std::vector<std::vector<double>> means;  // sums / sizes
  std::vector<std::size_t> sizes;
  double tau = 0.0;
  double initial_tau = 0.0;
  std::size_t iteration = 0;
  std::vector<GrowthStep> history;

  std::size_t k() const noexcept { return sizes.size(); }
  std::size_t assigned_count() const {
    return static_cast<std::size_t>(std::count_if(assignment.begin(), assignment.end(), [](int a) { return a != 0; }));
  }

  void add(std::size_t point, std::size_t cluster, const Level2Space& space) {
    assignment[point] = static_cast<int>(cluster + 1);
    ++sizes[cluster];
    const auto f = space[point];
    for (std::size_t a = 0; a < f.size(); ++a) sums[cluster][a] += f[a];
  }

  void refresh_means() {
    for (std::size_t c = 0; c < k(); ++c)
      for (std::size_t a = 0; a < sums[c].size(); ++a) means[c][a] = sums[c][a] / static_cast<double>(sizes[c]);
  }

  /// Best cluster for point i by K2(delta(g_i), P_C), lowest id on ties.
  std::pair<std::size_t, double> best_cluster(std::size_t i, const Level2Space& space) const {
    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k(); ++c) {
      const double sim = dot(space[i], means[c]);
      if (sim > best_sim) {
        best_sim = sim;
        best = c;
      }
    }
    return {best, best_sim};
  }
};

/// Grows k clusters from the seeds. Each iteration decays tau by rho, then every
/// unassigned point whose best cluster similarity exceeds tau joins that cluster.
/// Cluster means are read from the start of the iteration (batch update), so the
/// result does not depend on visitation order. Stops when nothing is unassigned
/// or tau falls below tau_floor.
inline ClusterState grow_clusters(const Level2Space& space, const std::vector<std::size_t>& seeds, double rho,
                                  double tau_floor, std::size_t threads = 1) {
  const std::size_t n = space.size();
  const std::size_t k = seeds.size();
  ClusterState state;
  state.assignment.assign(n, 0);
  state.seeds = seeds;
  state.sums.assign(k, std::vector<double>(space.dimension(), 0.0));
  state.means = state.sums;
  state.sizes.assign(k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    if (seeds[c] >= n) throw InvalidArgument("seed index out of range");
    if (state.assignment[seeds[c]] != 0) throw InvalidArgument("seeds must be distinct");
    state.add(seeds[c], c, space);
  }
  state.refresh_means();

  std::vector<std::size_t> unassigned;
  for (std::size_t i = 0; i < n; ++i)
    if (state.assignment[i] == 0) unassigned.push_back(i);
  if (unassigned.empty()) return state;

  double tau = -std::numeric_limits<double>::infinity();
  for (auto i : unassigned) tau = std::max(tau, state.best_cluster(i, space).second);
  state.initial_tau = state.tau = tau;

  std::vector<std::pair<std::size_t, double>> best(n);
  while (!unassigned.empty()) {
    state.tau *= rho;
    ++state.iteration;
    parallel_for(unassigned.size(), threads, [&](std::size_t u) { best[u] = state.best_cluster(unassigned[u], space); });
    std::vector<std::size_t> remaining;
    for (std::size_t u = 0; u < unassigned.size(); ++u) {
      if (best[u].second > state.tau)
        state.add(unassigned[u], best[u].first, space);
      else
        remaining.push_back(unassigned[u]);
    }
    unassigned.swap(remaining);
    state.refresh_means();
    state.history.push_back({state.tau, n - unassigned.size()});
    if (state.tau < tau_floor) break;
  }
  return state;
}

struct PhaseTimings {
  double build_ik = 0.0;
  double feature_map = 0.0;
  double seed_selection = 0.0;
  double growing = 0.0;
  double final_assign = 0.0;
  double total = 0.0;
};

struct ClusteringResult {
  std::vector<int> labels;  // 1..k per trajectory
  std::vector<std::size_t> seeds;
  double objective = 0.0;   // sum over clusters of sum_{g in C} K2(delta(g), P_C)
  std::size_t iterations = 0;
  double initial_tau = 0.0;
  std::vector<GrowthStep> history;
  PhaseTimings timings;
};

/// sum_j sum_{g in C_j} <f(g), mean of f over C_j>, recomputed from labels.
inline double clustering_objective(const Level2Space& space, const std::vector<int>& labels, std::size_t k) {
  std::vector<std::vector<double>> means(k, std::vector<double>(space.dimension(), 0.0));
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i] - 1);
    ++sizes[c];
    for (std::size_t a = 0; a < space.dimension(); ++a) means[c][a] += space[i][a];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (sizes[c] > 0)
      for (auto& v : means[c]) v /= static_cast<double>(sizes[c]);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += dot(space[i], means[static_cast<std::size_t>(labels[i] - 1)]);
  return total;
}

/// Assigns every residual point to its most similar cluster regardless of tau.
inline ClusteringResult final_assign(ClusterState state, const Level2Space& space) {
  std::vector<std::pair<std::size_t, std::size_t>> residual;
  for (std::size_t i = 0; i < state.assignment.size(); ++i)
    if (state.assignment[i] == 0) residual.emplace_back(i, state.best_cluster(i, space).first);
  for (auto [i, c] : residual) state.add(i, c, space);
  state.refresh_means();

  ClusteringResult result;
  result.labels = state.assignment;
  result.seeds = state.seeds;
  result.iterations = state.iteration;
  result.initial_tau = state.initial_tau;
  result.history = state.history;
  for (std::size_t i = 0; i < result.labels.size(); ++i)
    result.objective += dot(space[i], state.means[static_cast<std::size_t>(result.labels[i] - 1)]);
  return result;
}

/// End-to-end clustering: level-1 embedding, level-2 mapping, seeds, growth,
/// final assignment. kernel2 = gdk_nystrom gives the Gaussian variant.
inline ClusteringResult cluster(const TrajectoryDataset& ds, const TidkcParams& params) {
  params.validate();
  if (ds.size() < params.k)
    throw InvalidArgument("dataset has " + std::to_string(ds.size()) + " trajectories, fewer than k = " +
                          std::to_string(params.k));
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  PhaseTimings timings;

  auto t0 = clock::now();
  const auto kernel1 = detail::fit_level1(ds, params);
  timings.build_ik = detail::seconds_since(t0);

  t0 = clock::now();
  const auto g_points = detail::as_points(embed_all(kernel1, ds, params.threads));
  timings.feature_map = detail::seconds_since(t0);

  t0 = clock::now();
  const auto kernel2 = detail::fit_level2(g_points, params);
  timings.build_ik += detail::seconds_since(t0);

  t0 = clock::now();
  const auto space = apply_level2(kernel2, g_points, params.threads);
  timings.feature_map += detail::seconds_since(t0);

  t0 = clock::now();
  const auto seeds = select_seeds(space, params.k, params.seed_subset_s, params.knn_for_contrast,
                                  detail::derive_seed(params.rng_seed, detail::kSubsample));
  timings.seed_selection = detail::seconds_since(t0);

  t0 = clock::now();
  auto state = grow_clusters(space, seeds, params.rho, params.tau_floor, params.threads);
  timings.growing = detail::seconds_since(t0);

  t0 = clock::now();
  auto result = final_assign(std::move(state), space);
  timings.final_assign = detail::seconds_since(t0);

  timings.total = detail::seconds_since(start);
  result.timings = timings;
  return result;
}

}  // namespace tidk
