#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include <json.hpp>

#include "tidk/data_model.hpp"
#include "tidk/error.hpp"
#include "tidk/random.hpp"

namespace tidk {

/// Isolation Kernel parameters: `psi` Voronoi centers per partitioning, `t` partitionings.
struct IKParams {
  std::size_t psi = 16;
  std::size_t t = 100;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (psi < 2) throw InvalidArgument("psi must be >= 2");
    if (t < 1) throw InvalidArgument("t must be >= 1");
  }

  friend bool operator==(const IKParams&, const IKParams&) = default;
};

/// phi(x): one active cell per partitioning, each with value 1/sqrt(t), so the
/// vector has unit norm and dot products average cell co-membership.
struct SparseFeatureVector {
  std::size_t dimension = 0;         // t * psi
  std::vector<std::uint32_t> active; // global index j * psi + cell, one per partitioning j
  double value = 0.0;                // 1 / sqrt(t)

  double dot(const SparseFeatureVector& other) const {
    std::size_t shared = 0;
    for (std::size_t j = 0; j < active.size(); ++j) shared += active[j] == other.active[j];
    return static_cast<double>(shared) * value * other.value;
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(dimension, 0.0);
    for (auto i : active) out[i] = value;
    return out;
  }
};

/// t random Voronoi partitionings of the fit set, each induced by psi centers
/// sampled without replacement. Immutable after fit().
class IsolationKernelModel {
 public:
  static IsolationKernelModel fit(const PointSet& points, const IKParams& params) {
    params.validate();
    if (points.size() < params.psi) throw InsufficientPoints(params.psi, points.size());
    IsolationKernelModel model;
    model.params_ = params;
    model.dims_ = points.dims();
    model.centers_.reserve(params.t * params.psi * model.dims_);
    Rng rng(params.rng_seed);
    for (std::size_t j = 0; j < params.t; ++j)
      for (std::size_t idx : rng.sample_without_replacement(points.size(), params.psi)) {
        const auto p = points[idx];
        model.centers_.insert(model.centers_.end(), p.begin(), p.end());
      }
    model.precompute_norms();
    return model;
  }

  const IKParams& params() const noexcept { return params_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t psi() const noexcept { return params_.psi; }
  std::size_t t() const noexcept { return params_.t; }
  std::size_t feature_dimension() const noexcept { return params_.t * params_.psi; }

  /// Center `c` of partitioning `j`.
  std::span<const double> center(std::size_t j, std::size_t c) const {
    return {centers_.data() + (j * params_.psi + c) * dims_, dims_};
  }

  /// Local cell (nearest center, lowest index on ties) of x in partitioning j.
  std::size_t cell(std::size_t j, std::span<const double> x) const {
    check_dims(x);
    return nearest(j, x, dot(x, x));
  }

  /// Writes the global active index of x for every partitioning into `out` (size t).
  void cells(std::span<const double> x, std::span<std::uint32_t> out) const {
    check_dims(x);
    const double xx = dot(x, x);
    for (std::size_t j = 0; j < params_.t; ++j)
      out[j] = static_cast<std::uint32_t>(j * params_.psi + nearest(j, x, xx));
  }

  SparseFeatureVector feature_map(std::span<const double> x) const {
    SparseFeatureVector v;
    v.dimension = feature_dimension();
    v.active.resize(params_.t);
    v.value = 1.0 / std::sqrt(static_cast<double>(params_.t));
    cells(x, v.active);
    return v;
  }

  /// kappa(x, y): fraction of partitionings in which x and y share a cell.
  double similarity(std::span<const double> x, std::span<const double> y) const {
    return feature_map(x).dot(feature_map(y));
  }

  nlohmann::json to_json() const {
    return {{"format", "tidk-isolation-kernel"},
            {"version", 1},
            {"psi", params_.psi},
            {"t", params_.t},
            {"rng_seed", params_.rng_seed},
            {"dims", dims_},
            {"centers", centers_}};
  }

  static IsolationKernelModel from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "tidk-isolation-kernel" || j.value("version", 0) != 1)
      throw InvalidArgument("not a version-1 isolation kernel model");
    IsolationKernelModel model;
    model.params_ = {j.at("psi").get<std::size_t>(), j.at("t").get<std::size_t>(),
                     j.at("rng_seed").get<std::uint64_t>()};
    model.params_.validate();
    model.dims_ = j.at("dims").get<std::size_t>();
    model.centers_ = j.at("centers").get<std::vector<double>>();
    if (model.centers_.size() != model.params_.t * model.params_.psi * model.dims_)
      throw InvalidArgument("isolation kernel model has the wrong number of center coordinates");
    model.precompute_norms();
    return model;
  }

  friend bool operator==(const IsolationKernelModel& a, const IsolationKernelModel& b) {
    return a.params_ == b.params_ && a.dims_ == b.dims_ && a.centers_ == b.centers_;
  }

 private:
  void check_dims(std::span<const double> x) const {
    if (x.size() != dims_) throw DimensionMismatch(dims_, x.size(), "isolation kernel input");
  }

  void precompute_norms() {
    const std::size_t count = params_.t * params_.psi;
    norms_.resize(count);
    for (std::size_t c = 0; c < count; ++c) {
      std::span<const double> p(centers_.data() + c * dims_, dims_);
      norms_[c] = dot(p, p);
    }
  }

  std::size_t nearest(std::size_t j, std::span<const double> x, double xx) const {
    // Low dimensions: exact squared differences. High dimensions (embedded
    // trajectories): expand |x - c|^2 = |x|^2 + |c|^2 - 2<x,c>.
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < params_.psi; ++c) {
      const auto ctr = center(j, c);
      const double dist = dims_ <= 8 ? squared_distance(x, ctr)
                                     : xx + norms_[j * params_.psi + c] - 2.0 * dot(x, ctr);
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    return best;
  }

  IKParams params_;
  std::size_t dims_ = 0;
  std::vector<double> centers_;
  std::vector<double> norms_;
};

inline IsolationKernelModel fit(const PointSet& points, const IKParams& params) {
  return IsolationKernelModel::fit(points, params);
}

inline SparseFeatureVector feature_map(const IsolationKernelModel& model, std::span<const double> x) {
  return model.feature_map(x);
}

inline double ik_similarity(const IsolationKernelModel& model, std::span<const double> x,
                            std::span<const double> y) {
  return model.similarity(x, y);
}

inline void save_model(const std::filesystem::path& path, const IsolationKernelModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file '" + path.string() + "'");
  out << model.to_json().dump() << '\n';
}

inline IsolationKernelModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  return IsolationKernelModel::from_json(nlohmann::json::parse(in));
}

}  // namespace tidk
