#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tidk/baselines.hpp"
#include "tidk/data_model.hpp"
#include "tidk/distributional_kernel.hpp"
#include "tidk/io.hpp"
#include "tidk/random.hpp"
#include "tidk/tidkc.hpp"

namespace tidk {

enum class BenchTarget { idk_embed, gdk_embed, hausdorff_matrix, dtw_matrix, tidkc, tgdkc };

inline std::string to_string(BenchTarget t) {
  switch (t) {
    case BenchTarget::idk_embed: return "idk_embed";
    case BenchTarget::gdk_embed: return "gdk_embed";
    case BenchTarget::hausdorff_matrix: return "hausdorff_matrix";
    case BenchTarget::dtw_matrix: return "dtw_matrix";
    case BenchTarget::tidkc: return "tidkc";
    case BenchTarget::tgdkc: return "tgdkc";
  }
  return "?";
}

inline std::optional<BenchTarget> parse_bench_target(const std::string& name) {
  for (auto t : {BenchTarget::idk_embed, BenchTarget::gdk_embed, BenchTarget::hausdorff_matrix,
                 BenchTarget::dtw_matrix, BenchTarget::tidkc, BenchTarget::tgdkc})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

struct TimingRecord {
  std::string target;
  std::string phase;  // build_ik, feature_map, seed_selection, growing, final_assign or total
  std::size_t n = 0;
  double seconds = 0.0;
  std::size_t threads = 1;
  nlohmann::json params;
};

/// m jittered copies of every trajectory (copy 0 is the original). Ids get a
/// "#r" suffix for r >= 1; labels are preserved.
inline TrajectoryDataset replicate_with_jitter(const TrajectoryDataset& base, std::size_t multiplier, double sigma,
                                               std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  std::vector<Trajectory> out;
  out.reserve(base.size() * multiplier);
  for (std::size_t r = 0; r < multiplier; ++r)
    for (const auto& t : base.trajectories()) {
      if (r == 0) {
        out.push_back(t);
        continue;
      }
      std::vector<double> coords = t.points.data();
      for (auto& v : coords) v += sigma * rng.normal();
      out.push_back({t.id + "#" + std::to_string(r), t.label, PointSet(t.dims(), std::move(coords))});
    }
  return TrajectoryDataset(std::move(out));
}

struct BenchConfig {
  std::size_t reps = 3;
  double jitter = 1e-3;
  std::uint64_t rng_seed = 0;
  TidkcParams clustering{};
  MeasureParams measure{};
};

namespace detail {
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline nlohmann::json params_snapshot(BenchTarget target, const BenchConfig& cfg) {
  nlohmann::json j{{"reps", cfg.reps}, {"jitter", cfg.jitter}, {"seed", cfg.rng_seed}};
  if (target == BenchTarget::tidkc || target == BenchTarget::tgdkc) {
    const auto& p = cfg.clustering;
    j["k"] = p.k;
    j["rho"] = p.rho;
    j["psi1"] = p.level1.psi;
    j["t1"] = p.level1.t;
    j["psi2"] = p.level2.psi;
    j["t2"] = p.level2.t;
    j["s"] = p.seed_subset_s;
  } else if (target == BenchTarget::idk_embed) {
    j["psi"] = cfg.measure.ik.psi;
    j["t"] = cfg.measure.ik.t;
  }
  return j;
}

inline double time_target(BenchTarget target, const TrajectoryDataset& ds, const BenchConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  switch (target) {
    case BenchTarget::idk_embed:
      (void)embed_dataset(ds, KernelKind::idk, cfg.measure.ik, cfg.measure.gdk, cfg.measure.threads);
      break;
    case BenchTarget::gdk_embed:
      (void)embed_dataset(ds, KernelKind::gdk_nystrom, cfg.measure.ik, cfg.measure.gdk, cfg.measure.threads);
      break;
    case BenchTarget::hausdorff_matrix: (void)pairwise_matrix(ds, Measure::hausdorff, cfg.measure); break;
    case BenchTarget::dtw_matrix: (void)pairwise_matrix(ds, Measure::dtw, cfg.measure); break;
    case BenchTarget::tidkc:
    case BenchTarget::tgdkc: {
      auto p = cfg.clustering;
      p.kernel2 = target == BenchTarget::tidkc ? KernelKind::idk : KernelKind::gdk_nystrom;
      (void)cluster(ds, p);
      break;
    }
  }
  return seconds_since(start);
}
}  // namespace detail

/// Times `target` on the base dataset scaled by each multiplier (jittered
/// replication). Reports the median of cfg.reps runs, one record per multiplier.
inline std::vector<TimingRecord> scaleup_run(const TrajectoryDataset& base, const std::vector<std::size_t>& multipliers,
                                             BenchTarget target, const BenchConfig& cfg) {
  if (base.empty()) throw InvalidArgument("scaleup needs a non-empty base dataset");
  if (multipliers.empty() || multipliers.front() != 1) throw InvalidArgument("multipliers must start at 1");
  for (std::size_t i = 1; i < multipliers.size(); ++i)
    if (multipliers[i] <= multipliers[i - 1]) throw InvalidArgument("multipliers must be increasing");
  if (cfg.reps == 0) throw InvalidArgument("reps must be >= 1");
  std::vector<TimingRecord> records;
  for (auto m : multipliers) {
    const auto ds = replicate_with_jitter(base, m, cfg.jitter, cfg.rng_seed);
    std::vector<double> times;
    for (std::size_t r = 0; r < cfg.reps; ++r) times.push_back(detail::time_target(target, ds, cfg));
    records.push_back({to_string(target), "total", ds.size(), detail::median(times), cfg.measure.threads,
                       detail::params_snapshot(target, cfg)});
  }
  return records;
}

/// One instrumented clustering run, reported per phase plus the total.
inline std::vector<TimingRecord> phase_breakdown(const TrajectoryDataset& ds, const TidkcParams& params,
                                                 ClusteringResult* result_out = nullptr) {
  auto result = cluster(ds, params);
  const auto& t = result.timings;
  const std::string target = params.kernel2 == KernelKind::idk ? "tidkc" : "tgdkc";
  nlohmann::json snapshot{{"k", params.k},          {"rho", params.rho},         {"psi1", params.level1.psi},
                          {"t1", params.level1.t},  {"psi2", params.level2.psi}, {"t2", params.level2.t},
                          {"iterations", result.iterations}};
  std::vector<TimingRecord> records;
  for (auto [phase, secs] : {std::pair{"build_ik", t.build_ik}, std::pair{"feature_map", t.feature_map},
                             std::pair{"seed_selection", t.seed_selection}, std::pair{"growing", t.growing},
                             std::pair{"final_assign", t.final_assign}, std::pair{"total", t.total}})
    records.push_back({target, phase, ds.size(), secs, params.threads, snapshot});
  if (result_out) *result_out = std::move(result);
  return records;
}

inline void write_timing_csv(std::ostream& out, const std::vector<TimingRecord>& records) {
  out << "target,phase,n,seconds,threads\n";
  for (const auto& r : records)
    out << r.target << ',' << r.phase << ',' << r.n << ',' << format_double(r.seconds) << ',' << r.threads << '\n';
}

}  // namespace tidk
