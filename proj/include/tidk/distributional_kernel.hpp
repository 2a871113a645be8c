#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tidk/data_model.hpp"
#include "tidk/error.hpp"
#include "tidk/isolation_kernel.hpp"
#include "tidk/parallel.hpp"
#include "tidk/random.hpp"

namespace tidk {

enum class KernelKind { idk, gdk_nystrom };

inline std::string to_string(KernelKind k) { return k == KernelKind::idk ? "idk" : "gdk"; }

/// Kernel mean map of a point set: the average feature vector of its points.
struct MeanMapVector {
  std::vector<double> values;
  std::size_t source_size = 0;
  KernelKind kernel = KernelKind::idk;

  std::size_t dimension() const noexcept { return values.size(); }
  friend bool operator==(const MeanMapVector&, const MeanMapVector&) = default;
};

/// IDK mean map: (1/|pts|) * sum of phi(x). Linear in |pts|.
inline MeanMapVector embed_set_idk(const IsolationKernelModel& model, const PointSet& pts) {
  if (pts.empty()) throw InvalidArgument("cannot embed an empty point set");
  if (pts.dims() != model.dims()) throw DimensionMismatch(model.dims(), pts.dims(), "embed_set_idk");
  std::vector<std::uint32_t> counts(model.feature_dimension(), 0);
  std::vector<std::uint32_t> active(model.t());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    model.cells(pts[i], active);
    for (auto a : active) ++counts[a];
  }
  MeanMapVector v;
  v.kernel = KernelKind::idk;
  v.source_size = pts.size();
  v.values.resize(counts.size());
  const double scale = 1.0 / (std::sqrt(static_cast<double>(model.t())) * static_cast<double>(pts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) v.values[i] = counts[i] * scale;
  return v;
}

namespace detail {
inline void check_compatible(const MeanMapVector& a, const MeanMapVector& b) {
  if (a.kernel != b.kernel) throw InvalidArgument("mean maps come from different kernels");
  if (a.dimension() != b.dimension()) throw DimensionMismatch(a.dimension(), b.dimension(), "mean map");
}
}  // namespace detail

/// <a, b>: the empirical distributional kernel between the two source sets.
inline double idk_similarity(const MeanMapVector& a, const MeanMapVector& b) {
  detail::check_compatible(a, b);
  return dot(a.values, b.values);
}

/// Cosine-normalized <a, b> / (|a| |b|).
inline double normalized_similarity(const MeanMapVector& a, const MeanMapVector& b) {
  detail::check_compatible(a, b);
  const double na = std::sqrt(dot(a.values, a.values));
  const double nb = std::sqrt(dot(b.values, b.values));
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("normalized similarity of a zero vector");
  return dot(a.values, b.values) / (na * nb);
}

inline double gaussian_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  return std::exp(-gamma * squared_distance(x, y));
}

/// gamma = 1 / (2 * median^2) over pairwise distances of a subsample of at most
/// `max_sample` points. Falls back to gamma = 1 when the median distance is 0.
inline double median_heuristic_gamma(const PointSet& points, std::uint64_t rng_seed,
                                     std::size_t max_sample = 1000) {
  if (points.size() < 2) return 1.0;
  Rng rng(rng_seed);
  auto idx = rng.sample_without_replacement(points.size(), std::min(max_sample, points.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j) dists.push_back(euclidean_distance(points[idx[i]], points[idx[j]]));
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  const double median = *mid;
  return median > 0.0 ? 1.0 / (2.0 * median * median) : 1.0;
}

struct GDKParams {
  double gamma = 0.0;             // <= 0 selects the median heuristic at fit time
  std::size_t nystrom_samples = 1024;  // m, clamped to the fit set size
  std::size_t nystrom_rank = 0;        // l; 0 means l = m
  std::uint64_t rng_seed = 0;
};

/// Rank-l Nystrom feature map z(x) = Lambda^{-1/2} U^T k_m(x) for the Gaussian
/// kernel exp(-gamma |x - y|^2), built from m sampled landmarks.
class NystromMap {
 public:
  static constexpr double kRidge = 1e-10;
  static constexpr double kEigenFloor = 1e-12;

  static NystromMap fit(const PointSet& points, GDKParams params) {
    if (points.empty()) throw InsufficientPoints(1, 0);
    const std::size_t m = std::min(params.nystrom_samples, points.size());
    if (params.nystrom_samples == 0) throw InvalidArgument("nystrom_samples must be >= 1");
    if (params.nystrom_rank > m) throw InvalidArgument("nystrom_rank must not exceed nystrom_samples");
    if (params.gamma <= 0.0) params.gamma = median_heuristic_gamma(points, params.rng_seed);

    NystromMap map;
    map.gamma_ = params.gamma;
    map.dims_ = points.dims();
    Rng rng(params.rng_seed);
    auto idx = rng.sample_without_replacement(points.size(), m);
    std::sort(idx.begin(), idx.end());
    map.landmarks_ = PointSet(points.dims());
    map.landmarks_.reserve(m);
    for (auto i : idx) map.landmarks_.push_back(points[i]);

    Eigen::MatrixXd w(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j)
        w(i, j) = w(j, i) = gaussian_kernel(map.landmarks_[i], map.landmarks_[j], map.gamma_);
    w.diagonal().array() += kRidge;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
    if (eig.info() != Eigen::Success) throw Error("Nystrom eigendecomposition failed");
    // Eigen sorts ascending; keep the largest l eigenpairs above the floor.
    const std::size_t rank = params.nystrom_rank == 0 ? m : params.nystrom_rank;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = static_cast<Eigen::Index>(m) - 1; c >= 0 && keep.size() < rank; --c)
      if (eig.eigenvalues()(c) > kEigenFloor) keep.push_back(c);
    if (keep.empty()) throw Error("Nystrom landmark kernel matrix is numerically zero");
    map.projection_.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(m));
    for (std::size_t r = 0; r < keep.size(); ++r)
      map.projection_.row(static_cast<Eigen::Index>(r)) =
          eig.eigenvectors().col(keep[r]).transpose() / std::sqrt(eig.eigenvalues()(keep[r]));
    return map;
  }

  double gamma() const noexcept { return gamma_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t landmark_count() const noexcept { return landmarks_.size(); }
  std::size_t feature_dimension() const noexcept { return static_cast<std::size_t>(projection_.rows()); }
  const PointSet& landmarks() const noexcept { return landmarks_; }

  /// Adds z(x) * weight into `out` (size feature_dimension()).
  void accumulate(std::span<const double> x, double weight, std::span<double> out) const {
    if (x.size() != dims_) throw DimensionMismatch(dims_, x.size(), "Nystrom input");
    const auto m = static_cast<Eigen::Index>(landmarks_.size());
    Eigen::VectorXd k(m);
    for (Eigen::Index i = 0; i < m; ++i) k(i) = gaussian_kernel(x, landmarks_[static_cast<std::size_t>(i)], gamma_);
    Eigen::Map<Eigen::VectorXd> dst(out.data(), projection_.rows());
    dst.noalias() += weight * (projection_ * k);
  }

  std::vector<double> feature(std::span<const double> x) const {
    std::vector<double> z(feature_dimension(), 0.0);
    accumulate(x, 1.0, z);
    return z;
  }

  nlohmann::json to_json() const {
    std::vector<double> proj(projection_.data(), projection_.data() + projection_.size());
    return {{"format", "tidk-nystrom"},
            {"version", 1},
            {"gamma", gamma_},
            {"dims", dims_},
            {"landmarks", landmarks_.data()},
            {"rank", projection_.rows()},
            {"projection_col_major", proj}};
  }

 private:
  double gamma_ = 1.0;
  std::size_t dims_ = 0;
  PointSet landmarks_;
  Eigen::MatrixXd projection_;
};

inline NystromMap gdk_fit_nystrom(const PointSet& points, const GDKParams& params) {
  return NystromMap::fit(points, params);
}

/// GDK mean map: (1/|pts|) * sum of z(x).
inline MeanMapVector embed_set_gdk(const NystromMap& map, const PointSet& pts) {
  if (pts.empty()) throw InvalidArgument("cannot embed an empty point set");
  if (pts.dims() != map.dims()) throw DimensionMismatch(map.dims(), pts.dims(), "embed_set_gdk");
  MeanMapVector v;
  v.kernel = KernelKind::gdk_nystrom;
  v.source_size = pts.size();
  v.values.assign(map.feature_dimension(), 0.0);
  const double w = 1.0 / static_cast<double>(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) map.accumulate(pts[i], w, v.values);
  return v;
}

/// sqrt(k(a,a) + k(b,b) - 2 k(a,b)), clamped at zero against rounding.
inline double kernel_distance(const MeanMapVector& a, const MeanMapVector& b) {
  const double d2 = idk_similarity(a, a) + idk_similarity(b, b) - 2.0 * idk_similarity(a, b);
  return std::sqrt(std::max(0.0, d2));
}

/// A fitted point kernel of either kind, exposing its explicit feature map.
class FittedKernel {
 public:
  static FittedKernel fit(const PointSet& points, KernelKind kind, const IKParams& ik, const GDKParams& gdk) {
    FittedKernel k;
    k.kind_ = kind;
    if (kind == KernelKind::idk)
      k.ik_.emplace(IsolationKernelModel::fit(points, ik));
    else
      k.nystrom_.emplace(NystromMap::fit(points, gdk));
    return k;
  }

  KernelKind kind() const noexcept { return kind_; }
  std::size_t feature_dimension() const {
    return ik_ ? ik_->feature_dimension() : nystrom_->feature_dimension();
  }
  const IsolationKernelModel* isolation_model() const noexcept { return ik_ ? &*ik_ : nullptr; }
  const NystromMap* nystrom_map() const noexcept { return nystrom_ ? &*nystrom_ : nullptr; }

  MeanMapVector embed(const PointSet& pts) const {
    return ik_ ? embed_set_idk(*ik_, pts) : embed_set_gdk(*nystrom_, pts);
  }

  /// Writes the dense feature vector of x into `out` (zero-initialized, feature_dimension()).
  void map_point(std::span<const double> x, std::span<double> out) const {
    if (ik_) {
      const auto phi = ik_->feature_map(x);
      for (auto a : phi.active) out[a] = phi.value;
    } else {
      nystrom_->accumulate(x, 1.0, out);
    }
  }

  nlohmann::json to_json() const { return ik_ ? ik_->to_json() : nystrom_->to_json(); }

 private:
  KernelKind kind_ = KernelKind::idk;
  std::optional<IsolationKernelModel> ik_;
  std::optional<NystromMap> nystrom_;
};

inline std::vector<MeanMapVector> embed_all(const FittedKernel& kernel, const TrajectoryDataset& ds,
                                            std::size_t threads = 1) {
  std::vector<MeanMapVector> out(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) { out[i] = kernel.embed(ds[i].points); });
  return out;
}

/// Level-1 embedding of every trajectory. The kernel is fit on the pooled
/// points S of the whole dataset, then each trajectory is mapped to its mean map.
inline std::vector<MeanMapVector> embed_dataset(const TrajectoryDataset& ds, KernelKind kernel, const IKParams& ik,
                                                const GDKParams& gdk, std::size_t threads = 1) {
  if (ds.empty()) throw InvalidArgument("cannot embed an empty dataset");
  return embed_all(FittedKernel::fit(ds.pooled_points(), kernel, ik, gdk), ds, threads);
}

}  // namespace tidk
