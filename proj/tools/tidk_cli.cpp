// tidk: command-line front end for trajectory embedding, distance matrices,
// clustering, retrieval evaluation, sampling sweeps and scaleup benchmarks.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tidk/tidk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Output files are written to "<path>.tmp" and renamed only when the whole
/// command succeeds; anything left uncommitted is deleted.
class OutputSet {
 public:
  ~OutputSet() {
    for (const auto& [tmp, final_path] : files_) {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
  }

  std::ofstream open(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path() && !path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    std::ofstream out(tmp, mode);
    if (!out) throw tidk::Error("cannot open output file '" + path.string() + "'");
    files_.emplace_back(tmp, path);
    return out;
  }

  void write_json(const fs::path& path, const json& j) {
    auto out = open(path);
    out << j.dump(2) << '\n';
  }

  void commit() {
    for (const auto& [tmp, final_path] : files_) fs::rename(tmp, final_path);
    files_.clear();
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> files_;
};

fs::path sidecar(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  p += suffix;
  return p;
}

/// Flags shared by every command that reads a trajectory file.
struct InputOptions {
  std::string path;
  std::string format = "auto";
  bool no_normalize = false;
  double order_weight = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("-i,--input", path, "Trajectory file (JSONL or long CSV)")->required();
    app->add_option("--format", format, "Input format")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
    app->add_flag("--no-normalize", no_normalize, "Skip per-axis min-max normalization");
    app->add_option("--order-weight", order_weight,
                    "Append an order dimension with this weight (0 disables)")
        ->check(CLI::NonNegativeNumber);
  }

  tidk::TrajectoryDataset load_raw() const {
    if (!fs::exists(path)) throw tidk::Error("input file '" + path + "' does not exist");
    if (format == "jsonl") return tidk::load_dataset(path, tidk::DatasetFormat::jsonl);
    if (format == "csv") return tidk::load_dataset(path, tidk::DatasetFormat::csv_long);
    return tidk::load_dataset(path);
  }

  tidk::TrajectoryDataset prepare(const tidk::TrajectoryDataset& raw) const {
    auto ds = no_normalize ? raw : tidk::min_max_normalize(raw);
    if (order_weight > 0.0) ds = tidk::augment_order_dimension(ds, order_weight);
    return ds;
  }

  tidk::TrajectoryDataset load() const { return prepare(load_raw()); }

  json to_json() const {
    return {{"input", path}, {"normalize", !no_normalize}, {"order_weight", order_weight}};
  }
};

struct KernelOptions {
  std::size_t psi = 16;
  std::size_t t = 100;
  double gamma = 0.0;
  std::size_t nystrom_m = 1024;
  std::size_t nystrom_rank = 0;

  void add_to(CLI::App* app) {
    app->add_option("--psi", psi, "Isolation Kernel centers per partitioning")->check(CLI::Range(2, 1 << 20));
    app->add_option("--t", t, "Isolation Kernel partitionings")->check(CLI::Range(1, 1 << 20));
    app->add_option("--gamma", gamma, "Gaussian bandwidth (0 = median heuristic)")->check(CLI::NonNegativeNumber);
    app->add_option("--nystrom-m", nystrom_m, "Nystrom landmarks")->check(CLI::Range(1, 1 << 20));
    app->add_option("--nystrom-rank", nystrom_rank, "Nystrom rank (0 = m)");
  }

  tidk::IKParams ik(std::uint64_t seed) const { return {psi, t, seed}; }
  tidk::GDKParams gdk(std::uint64_t seed) const { return {gamma, nystrom_m, nystrom_rank, seed}; }
  json to_json() const {
    return {{"psi", psi}, {"t", t}, {"gamma", gamma}, {"nystrom_m", nystrom_m}, {"nystrom_rank", nystrom_rank}};
  }
};

struct ClusterOptions {
  std::string algo = "tidkc";
  std::string kernel1 = "idk";
  std::size_t k = 2;
  double rho = 0.9;
  double tau_floor = 1e-5;
  std::size_t psi1 = 16, t1 = 100, psi2 = 4, t2 = 100;
  std::size_t s = 1000;
  std::size_t knn = 10;

  void add_to(CLI::App* app) {
    app->add_option("--algo", algo, "Clustering variant")->check(CLI::IsMember({"tidkc", "tgdkc"}));
    app->add_option("--kernel1", kernel1, "Trajectory representation kernel")->check(CLI::IsMember({"idk", "gdk"}));
    app->add_option("-k,--k", k, "Number of clusters")->check(CLI::Range(2, 1 << 30));
    app->add_option("--rho", rho, "Threshold growth rate in (0,1)")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    app->add_option("--tau-floor", tau_floor, "Stop growing below this threshold")->check(CLI::PositiveNumber);
    app->add_option("--psi1", psi1, "Level-1 psi")->check(CLI::Range(2, 1 << 20));
    app->add_option("--t1", t1, "Level-1 t")->check(CLI::Range(1, 1 << 20));
    app->add_option("--psi2", psi2, "Level-2 psi")->check(CLI::Range(2, 1 << 20));
    app->add_option("--t2", t2, "Level-2 t")->check(CLI::Range(1, 1 << 20));
    app->add_option("--s", s, "Seed-selection subset size")->check(CLI::Range(1, 1 << 30));
    app->add_option("--knn", knn, "Neighbours for local contrast")->check(CLI::Range(1, 1 << 20));
  }

  tidk::TidkcParams params(const GlobalOptions& g) const {
    tidk::TidkcParams p;
    p.k = k;
    p.rho = rho;
    p.tau_floor = tau_floor;
    p.level1 = {psi1, t1, 0};
    p.level2 = {psi2, t2, 0};
    p.seed_subset_s = s;
    p.knn_for_contrast = knn;
    p.kernel1 = kernel1 == "idk" ? tidk::KernelKind::idk : tidk::KernelKind::gdk_nystrom;
    p.kernel2 = algo == "tidkc" ? tidk::KernelKind::idk : tidk::KernelKind::gdk_nystrom;
    p.rng_seed = g.seed;
    p.threads = g.threads;
    p.validate();
    return p;
  }

  json to_json() const {
    return {{"algo", algo}, {"kernel1", kernel1}, {"k", k},       {"rho", rho},   {"tau_floor", tau_floor},
            {"psi1", psi1}, {"t1", t1},           {"psi2", psi2}, {"t2", t2},     {"s", s},
            {"knn", knn}};
  }
};

json provenance(const std::string& command, const GlobalOptions& g) {
  return {{"command", command}, {"seed", g.seed}, {"threads", g.threads}};
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// ---- commands --------------------------------------------------------------

struct SynthCommand {
  std::string spec_path;
  std::size_t clusters = 4;
  std::size_t per_cluster = 50;
  double sigma = 0.05;
  std::size_t min_length = 20, max_length = 40;
  bool direction_pairs = false;
  std::string output;
  std::string format = "jsonl";

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("synth", "Generate a labeled synthetic trajectory dataset");
    c->add_option("--spec", spec_path, "Key-value synthetic spec file (overrides the flags below)");
    c->add_option("--clusters", clusters, "Number of separated line backbones")->check(CLI::Range(1, 1 << 20));
    c->add_option("--per-cluster", per_cluster, "Trajectories per label")->check(CLI::Range(1, 1 << 30));
    c->add_option("--sigma", sigma, "Gaussian jitter per coordinate")->check(CLI::NonNegativeNumber);
    c->add_option("--min-length", min_length, "Minimum trajectory length")->check(CLI::Range(1, 1 << 30));
    c->add_option("--max-length", max_length, "Maximum trajectory length")->check(CLI::Range(1, 1 << 30));
    c->add_flag("--direction-pairs", direction_pairs, "Emit every backbone in both directions");
    c->add_option("-o,--output", output, "Output dataset path")->required();
    c->add_option("--format", format, "Output format")->check(CLI::IsMember({"jsonl", "csv"}));
    command = c;
  }

  int run(const GlobalOptions& g) {
    tidk::SyntheticSpec spec;
    if (!spec_path.empty()) {
      spec = tidk::load_synthetic_spec(spec_path);
    } else {
      spec = tidk::separated_lines_spec(clusters, per_cluster, sigma);
      spec.min_length = min_length;
      spec.max_length = max_length;
      spec.direction_pairs = direction_pairs;
    }
    const auto ds = tidk::generate_synthetic(spec, g.seed);
    OutputSet out;
    {
      auto f = out.open(output);
      if (format == "jsonl")
        tidk::write_jsonl(f, ds);
      else
        tidk::write_csv_long(f, ds);
    }
    out.commit();
    std::cout << "synth: wrote " << ds.size() << " trajectories (" << spec.cluster_count() << " labels) to "
              << output << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

struct EmbedCommand {
  InputOptions input;
  KernelOptions kernel;
  std::string kernel_name = "idk";
  std::string output;
  std::string binary_output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("embed", "Map every trajectory to its kernel mean map");
    input.add_to(c);
    kernel.add_to(c);
    c->add_option("--kernel", kernel_name, "Point kernel")->check(CLI::IsMember({"idk", "gdk"}));
    c->add_option("-o,--output", output, "Embedding CSV (one row per trajectory id)")->required();
    c->add_option("--binary", binary_output, "Also write the compact binary embedding format");
    command = c;
  }

  int run(const GlobalOptions& g) {
    const auto ds = input.load();
    const auto kind = kernel_name == "idk" ? tidk::KernelKind::idk : tidk::KernelKind::gdk_nystrom;
    const auto fitted = tidk::FittedKernel::fit(ds.pooled_points(), kind, kernel.ik(g.seed), kernel.gdk(g.seed));
    const auto embeddings = tidk::embed_all(fitted, ds, g.threads);

    OutputSet out;
    {
      auto f = out.open(output);
      tidk::write_embedding_csv(f, ds, embeddings);
    }
    if (!binary_output.empty()) {
      auto f = out.open(binary_output, std::ios::out | std::ios::binary);
      tidk::write_embedding_binary(f, ds, embeddings);
    }
    out.write_json(sidecar(output, ".model.json"), fitted.to_json());
    json meta = provenance("embed", g);
    meta["kernel"] = kernel_name;
    meta["params"] = kernel.to_json();
    meta["input"] = input.to_json();
    meta["n"] = ds.size();
    meta["dimension"] = fitted.feature_dimension();
    out.write_json(sidecar(output, ".meta.json"), meta);
    out.commit();
    std::cout << "embed: " << ds.size() << " trajectories -> " << fitted.feature_dimension() << "-dim "
              << kernel_name << " mean maps in " << output << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

struct MatrixCommand {
  InputOptions input;
  KernelOptions kernel;
  std::string measure = "idk";
  std::optional<std::size_t> band;
  std::string output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("matrix", "Pairwise distance matrix for external clusterers");
    input.add_to(c);
    kernel.add_to(c);
    c->add_option("--measure", measure, "hausdorff | dtw | idk | gdk")->required();
    c->add_option("--band", band, "DTW Sakoe-Chiba half-width");
    c->add_option("-o,--output", output, "Distance matrix CSV")->required();
    command = c;
  }

  int run(const GlobalOptions& g) {
    const auto m = tidk::parse_measure(measure);
    if (!m) {
      std::cerr << "matrix: unknown measure '" << measure << "'\n\n" << command->help();
      return 2;
    }
    const auto ds = input.load();
    tidk::MeasureParams params{band, kernel.ik(g.seed), kernel.gdk(g.seed), g.threads};
    const auto dm = tidk::pairwise_matrix(ds, *m, params);
    OutputSet out;
    {
      auto f = out.open(output);
      tidk::write_distance_csv(f, dm);
    }
    json meta = provenance("matrix", g);
    meta["measure"] = measure;
    meta["params"] = kernel.to_json();
    if (band) meta["params"]["band"] = *band;
    meta["input"] = input.to_json();
    meta["n"] = ds.size();
    out.write_json(sidecar(output, ".json"), meta);
    out.commit();
    std::cout << "matrix: " << dm.size() << "x" << dm.size() << " " << measure << " distances in " << output << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

json timings_json(const tidk::PhaseTimings& t) {
  return {{"build_ik", t.build_ik},   {"feature_map", t.feature_map},   {"seed_selection", t.seed_selection},
          {"growing", t.growing},     {"final_assign", t.final_assign}, {"total", t.total}};
}

struct ClusterCommand {
  InputOptions input;
  ClusterOptions options;
  bool eval = false;
  std::string output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("cluster", "Cluster trajectories with TIDKC or TGDKC");
    input.add_to(c);
    options.add_to(c);
    c->add_flag("--eval", eval, "Score against the input labels (NMI, ARI)");
    c->add_option("-o,--output", output, "Labels CSV (id,label)")->required();
    command = c;
  }

  int run(const GlobalOptions& g) {
    const auto ds = input.load();
    const auto params = options.params(g);
    const auto result = tidk::cluster(ds, params);

    OutputSet out;
    {
      auto f = out.open(output);
      f << "id,label\n";
      for (std::size_t i = 0; i < ds.size(); ++i) f << ds[i].id << ',' << result.labels[i] << '\n';
    }
    json meta = provenance("cluster", g);
    meta["params"] = options.to_json();
    meta["input"] = input.to_json();
    meta["n"] = ds.size();
    meta["objective"] = result.objective;
    meta["iterations"] = result.iterations;
    meta["initial_tau"] = result.initial_tau;
    json history = json::array();
    for (const auto& h : result.history) history.push_back({{"tau", h.tau}, {"assigned", h.assigned}});
    meta["tau_history"] = history;
    json seeds = json::array();
    for (auto s : result.seeds) seeds.push_back(ds[s].id);
    meta["seeds"] = seeds;
    meta["timings"] = timings_json(result.timings);
    std::string summary;
    if (eval) {
      const auto truth = ds.labels();
      meta["nmi"] = tidk::nmi(truth, result.labels);
      meta["ari"] = tidk::ari(truth, result.labels);
      summary = " NMI=" + tidk::format_double(meta["nmi"].get<double>()) +
                " ARI=" + tidk::format_double(meta["ari"].get<double>());
    }
    out.write_json(sidecar(output, ".meta.json"), meta);
    out.commit();
    std::cout << "cluster: " << ds.size() << " trajectories into " << params.k << " clusters in "
              << result.iterations << " iterations" << summary << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

struct RetrieveCommand {
  InputOptions input;
  KernelOptions kernel;
  std::string measure = "idk";
  std::vector<std::size_t> ks{1, 5, 10};
  std::optional<std::size_t> band;
  std::string output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("retrieve", "precision@k retrieval evaluation (every trajectory a query)");
    input.add_to(c);
    kernel.add_to(c);
    c->add_option("--measure", measure, "idk | gdk | hausdorff | dtw | random");
    c->add_option("--ks", ks, "k values")->delimiter(',');
    c->add_option("--band", band, "DTW Sakoe-Chiba half-width");
    c->add_option("-o,--output", output, "Curve CSV (k,precision)")->required();
    command = c;
  }

  int run(const GlobalOptions& g) {
    const bool random = measure == "random";
    const auto m = tidk::parse_measure(measure);
    if (!m && !random) {
      std::cerr << "retrieve: unknown measure '" << measure << "'\n\n" << command->help();
      return 2;
    }
    const auto ds = input.load();
    const auto labels = ds.labels();
    tidk::ScoreMatrix scores;
    if (random) {
      tidk::Rng rng(g.seed);
      scores = {ds.size(), std::vector<double>(ds.size() * ds.size()), true};
      for (auto& v : scores.values) v = rng.uniform();
    } else if (*m == tidk::Measure::idk_distance || *m == tidk::Measure::gdk_distance) {
      const auto kind = *m == tidk::Measure::idk_distance ? tidk::KernelKind::idk : tidk::KernelKind::gdk_nystrom;
      scores = tidk::ScoreMatrix::similarities(
          tidk::embed_dataset(ds, kind, kernel.ik(g.seed), kernel.gdk(g.seed), g.threads), g.threads);
    } else {
      tidk::MeasureParams params{band, kernel.ik(g.seed), kernel.gdk(g.seed), g.threads};
      scores = tidk::ScoreMatrix::distances(tidk::pairwise_matrix(ds, *m, params));
    }
    const auto curve = tidk::precision_at_k(scores, labels, ks, g.threads);
    OutputSet out;
    {
      auto f = out.open(output);
      tidk::write_precision_csv(f, curve);
    }
    json meta = provenance("retrieve", g);
    meta["measure"] = measure;
    meta["params"] = kernel.to_json();
    meta["input"] = input.to_json();
    meta["n"] = ds.size();
    meta["ks"] = curve.ks;
    meta["precision"] = curve.precision;
    out.write_json(sidecar(output, ".meta.json"), meta);
    out.commit();
    std::cout << "retrieve: " << measure << " precision@" << curve.ks.front() << "="
              << tidk::format_double(curve.precision.front()) << " over " << ds.size() << " queries\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

struct EvaluateCommand {
  std::string dataset;
  std::string labels;
  std::string output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("evaluate", "Score a labels CSV against a labeled dataset");
    c->add_option("-i,--input", dataset, "Labeled trajectory file")->required();
    c->add_option("--labels", labels, "Predicted labels CSV (id,label)")->required();
    c->add_option("-o,--output", output, "Metrics JSON");
    command = c;
  }

  int run(const GlobalOptions& g) {
    if (!fs::exists(dataset)) throw tidk::Error("input file '" + dataset + "' does not exist");
    const auto ds = tidk::load_dataset(dataset);
    const auto truth = ds.labels();
    std::ifstream in(labels);
    if (!in) throw tidk::Error("cannot open labels file '" + labels + "'");
    std::unordered_map<std::string, int> predicted;
    std::string line;
    std::getline(in, line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto comma = line.rfind(',');
      if (comma == std::string::npos) throw tidk::ParseError(labels, line_no, "expected id,label");
      predicted[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
    }
    std::vector<int> pred;
    for (const auto& t : ds.trajectories()) {
      auto it = predicted.find(t.id);
      if (it == predicted.end()) throw tidk::Error("no predicted label for trajectory '" + t.id + "'");
      pred.push_back(it->second);
    }
    json report = provenance("evaluate", g);
    report["nmi"] = tidk::nmi(truth, pred);
    report["ari"] = tidk::ari(truth, pred);
    report["n"] = ds.size();
    if (!output.empty()) {
      OutputSet out;
      out.write_json(output, report);
      out.commit();
    }
    std::cout << "evaluate: NMI=" << tidk::format_double(report["nmi"].get<double>())
              << " ARI=" << tidk::format_double(report["ari"].get<double>()) << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

struct SweepCommand {
  InputOptions input;
  ClusterOptions options;
  std::string rates = "1,0.9,0.7,0.5,0.3";
  std::string selection = "both";
  std::string output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("sweep", "Clustering NMI under reduced sampling rates");
    input.add_to(c);
    options.add_to(c);
    c->add_option("--rates", rates, "Comma-separated sampling rates in (0,1]");
    c->add_option("--selection", selection, "Which trajectories to downsample")
        ->check(CLI::IsMember({"all", "half", "both"}));
    c->add_option("-o,--output", output, "Table CSV (selection,rate,nmi,ari)")->required();
    command = c;
  }

  int run(const GlobalOptions& g) {
    const auto raw = input.load_raw();
    const auto params = options.params(g);
    const auto rate_list = parse_real_list(rates);
    std::vector<tidk::SweepRow> rows;
    auto prepare = [&](const tidk::TrajectoryDataset& d) { return input.prepare(d); };
    if (selection != "half")
      for (auto& r : tidk::run_sampling_sweep(raw, rate_list, tidk::DownsampleSelection::all, params, prepare, g.seed))
        rows.push_back(r);
    if (selection != "all")
      for (auto& r : tidk::run_sampling_sweep(raw, rate_list, tidk::DownsampleSelection::half_per_cluster, params,
                                              prepare, g.seed))
        rows.push_back(r);
    OutputSet out;
    {
      auto f = out.open(output);
      f << "selection,rate,nmi,ari\n";
      for (const auto& r : rows)
        f << (r.selection == tidk::DownsampleSelection::all ? "All" : "Half") << ',' << tidk::format_double(r.rate)
          << ',' << tidk::format_double(r.nmi) << ',' << tidk::format_double(r.ari) << '\n';
    }
    json meta = provenance("sweep", g);
    meta["params"] = options.to_json();
    meta["input"] = input.to_json();
    out.write_json(sidecar(output, ".meta.json"), meta);
    out.commit();
    std::cout << "sweep: " << rows.size() << " rows written to " << output << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

struct BenchCommand {
  std::string input_path;
  std::string target = "idk_embed";
  std::vector<std::size_t> multipliers{1, 2, 4};
  std::size_t reps = 3;
  double jitter = 1e-3;
  ClusterOptions options;
  KernelOptions kernel;
  std::string output;

  void add(CLI::App& parent) {
    auto* c = parent.add_subcommand("bench", "Scaleup timings (median of reps) and clustering phase breakdown");
    c->add_option("-i,--input", input_path, "Base dataset (default: 4-cluster synthetic, 50 per cluster)");
    c->add_option("--target", target, "What to time")
        ->check(CLI::IsMember({"idk_embed", "gdk_embed", "hausdorff_matrix", "dtw_matrix", "tidkc", "tgdkc"}));
    c->add_option("--multipliers", multipliers, "Dataset size multipliers, starting at 1")->delimiter(',');
    c->add_option("--reps", reps, "Repetitions per size (median reported)")->check(CLI::Range(1, 1000));
    c->add_option("--jitter", jitter, "Replication jitter sigma")->check(CLI::NonNegativeNumber);
    options.add_to(c);
    kernel.add_to(c);
    c->add_option("-o,--output", output, "Timing CSV (target,phase,n,seconds,threads)")->required();
    command = c;
  }

  int run(const GlobalOptions& g) {
    tidk::TrajectoryDataset base;
    if (input_path.empty()) {
      base = tidk::min_max_normalize(tidk::generate_synthetic(tidk::separated_lines_spec(4, 50, 0.05), g.seed));
    } else {
      if (!fs::exists(input_path)) throw tidk::Error("input file '" + input_path + "' does not exist");
      base = tidk::min_max_normalize(tidk::load_dataset(input_path));
    }
    const auto t = *tidk::parse_bench_target(target);
    tidk::BenchConfig cfg;
    cfg.reps = reps;
    cfg.jitter = jitter;
    cfg.rng_seed = g.seed;
    cfg.clustering = options.params(g);
    cfg.measure = {std::nullopt, kernel.ik(g.seed), kernel.gdk(g.seed), g.threads};
    auto records = tidk::scaleup_run(base, multipliers, t, cfg);
    if (t == tidk::BenchTarget::tidkc || t == tidk::BenchTarget::tgdkc) {
      auto params = cfg.clustering;
      params.kernel2 = t == tidk::BenchTarget::tidkc ? tidk::KernelKind::idk : tidk::KernelKind::gdk_nystrom;
      for (auto& r : tidk::phase_breakdown(base, params)) records.push_back(std::move(r));
    }
    OutputSet out;
    {
      auto f = out.open(output);
      tidk::write_timing_csv(f, records);
    }
    json meta = provenance("bench", g);
    meta["target"] = target;
    meta["multipliers"] = multipliers;
    meta["reps"] = reps;
    meta["jitter"] = jitter;
    out.write_json(sidecar(output, ".meta.json"), meta);
    out.commit();
    std::cout << "bench: " << records.size() << " timing rows for " << target << " in " << output << "\n";
    return 0;
  }

  CLI::App* command = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tidk: trajectory similarity and clustering with isolation distributional kernels"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--seed", global.seed, "Global random seed");
  app.add_option("--threads", global.threads, "Worker threads")->check(CLI::Range(1, 1024));

  SynthCommand synth;
  EmbedCommand embed;
  MatrixCommand matrix;
  ClusterCommand cluster;
  RetrieveCommand retrieve;
  EvaluateCommand evaluate;
  SweepCommand sweep;
  BenchCommand bench;
  synth.add(app);
  embed.add(app);
  matrix.add(app);
  cluster.add(app);
  retrieve.add(app);
  evaluate.add(app);
  sweep.add(app);
  bench.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) {
      for (auto* sub : app.get_subcommands()) std::cerr << "\n" << sub->help();
    }
    return code;
  }

  try {
    if (synth.command->parsed()) return synth.run(global);
    if (embed.command->parsed()) return embed.run(global);
    if (matrix.command->parsed()) return matrix.run(global);
    if (cluster.command->parsed()) return cluster.run(global);
    if (retrieve.command->parsed()) return retrieve.run(global);
    if (evaluate.command->parsed()) return evaluate.run(global);
    if (sweep.command->parsed()) return sweep.run(global);
    if (bench.command->parsed()) return bench.run(global);
  } catch (const std::exception& e) {
    std::cerr << "tidk: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
