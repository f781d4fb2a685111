#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvembed/baselines.hpp"
#include "mvembed/csv.hpp"
#include "mvembed/dataset.hpp"
#include "mvembed/error.hpp"
#include "mvembed/evaluation.hpp"
#include "mvembed/kernels.hpp"
#include "mvembed/mrpe.hpp"
#include "mvembed/parallel.hpp"
#include "mvembed/random.hpp"
#include "mvembed/result_io.hpp"
#include "mvembed/synthetic.hpp"

namespace mvembed::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kSeedScheme =
    "component seed = splitmix64(seed ^ fnv1a64(tag)); synth uses the seed directly "
    "(lift/<v>, noise/<v> tags per view); knn eval splits use tag eval/knn then split/<repeat>";

struct Options {
  // data
  std::string manifest;
  bool header = false;
  bool standardize = false;
  // model
  std::size_t d = 10;
  std::size_t k = 10;
  double r = 5.0;
  std::optional<double> reg_eps;
  double tol = 1e-7;
  std::size_t max_iters = 100;
  bool keep_trivial = false;
  // synth
  std::size_t n = 300;
  std::size_t classes = 3;
  double sigma = 0.5;
  double separation = 1.0;
  std::vector<std::size_t> dims{20, 30};
  std::vector<std::string> signals;
  // baseline
  std::string kind;
  std::optional<double> heat_sigma;
  bool binary = false;
  std::optional<std::size_t> view;
  // eval
  std::string embedding;
  std::string labels;
  std::size_t repeats = 20;
  double test_frac = 0.2;
  bool stratified = false;
  std::string queries;
  std::size_t top_k = 2;
  std::vector<std::size_t> curve_k;
  // sweep
  std::vector<double> r_grid;
  std::vector<std::size_t> k_grid;
  std::vector<std::size_t> d_grid;
  // trace
  std::string run_dir;
  // common
  std::uint64_t seed = 0;
  std::string out;
};

json run_echo(const std::string& command, const std::vector<std::string>& args, const Options& o) {
  return {{"tool", "mvembed"},
          {"version", MVEMBED_VERSION},
          {"command", command},
          {"args", args},
          {"seed", o.seed},
          {"seed_scheme", kSeedScheme},
          {"simd", std::string(kernels::to_string(kernels::active_isa()))}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "'");
}

void write_json(const fs::path& path, const json& j) { csv::write_text(path, j.dump(2) + "\n"); }

MultiViewDataset load_from(const Options& o) {
  if (o.manifest.empty()) throw Error(ErrorCode::InvalidArgument, "--manifest is required");
  Manifest manifest = read_manifest(o.manifest);
  manifest.header = manifest.header || o.header;
  MultiViewDataset ds = load_dataset(manifest);
  return o.standardize ? standardize(ds) : ds;
}

MrpeConfig model_config(const Options& o) {
  MrpeConfig c;
  c.d = o.d;
  c.k = o.k;
  c.r = o.r;
  c.reg_eps = o.reg_eps;
  c.tol = o.tol;
  c.max_iters = o.max_iters;
  c.drop_trivial = !o.keep_trivial;
  return c;
}

std::vector<int> labels_from(const Options& o) {
  if (!o.labels.empty()) return csv::read_labels(o.labels, {o.header});
  if (!o.manifest.empty()) {
    const MultiViewDataset ds = load_from(o);
    if (ds.labels()) return *ds.labels();
  }
  throw Error(ErrorCode::InvalidArgument, "labels are required (--labels or a manifest with labels)");
}

Eigen::MatrixXd embedding_from(const Options& o) {
  if (o.embedding.empty()) throw Error(ErrorCode::InvalidArgument, "--embedding is required");
  return csv::read_matrix(o.embedding, {o.header}, o.embedding).transpose();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

// --- synth -----------------------------------------------------------------

int cmd_synth(const Options& o, const std::vector<std::string>& args) {
  SynthSpec spec;
  spec.n = o.n;
  spec.n_classes = o.classes;
  spec.noise_sigma = o.sigma;
  spec.separation = o.separation;
  spec.seed = o.seed;
  spec.views.clear();
  if (!o.signals.empty() && o.signals.size() != o.dims.size()) {
    throw Error(ErrorCode::InvalidArgument, "--signal must be given once per view or not at all");
  }
  for (std::size_t v = 0; v < o.dims.size(); ++v) {
    SynthViewSpec vs{o.dims[v], 1.0, 1.0, "view" + std::to_string(v)};
    if (!o.signals.empty()) {
      const auto comma = o.signals[v].find(',');
      try {
        vs.signal_x = std::stod(o.signals[v].substr(0, comma));
        vs.signal_y = comma == std::string::npos ? vs.signal_x : std::stod(o.signals[v].substr(comma + 1));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "--signal expects 'x,y', got '" + o.signals[v] + "'");
      }
    }
    spec.views.push_back(vs);
  }

  const MultiViewDataset ds = generate_synthetic(spec);
  const fs::path manifest = save_dataset(ds, o.out);
  json meta = run_echo("synth", args, o);
  meta["spec"] = {{"n", spec.n},
                  {"n_classes", spec.n_classes},
                  {"noise_sigma", spec.noise_sigma},
                  {"separation", spec.separation},
                  {"seed", spec.seed}};
  for (const auto& vs : spec.views) {
    meta["spec"]["views"].push_back({{"name", vs.name}, {"dim", vs.dim}, {"signal", {vs.signal_x, vs.signal_y}}});
  }
  write_json(fs::path(o.out) / "meta.json", meta);
  std::cout << manifest.string() << "\n";
  return 0;
}

// --- fit -------------------------------------------------------------------

void log_iterations(const EmbeddingResult& result) {
  for (std::size_t t = 0; t < result.iters_run; ++t) {
    std::cerr << "iter " << (t + 1) << " objective " << csv::format_double(result.objective_trace[t]) << " alpha [";
    for (Eigen::Index v = 0; v < result.alpha_trace[t].size(); ++v) {
      std::cerr << (v ? " " : "") << csv::format_double(result.alpha_trace[t][v]);
    }
    std::cerr << "]\n";
  }
}

int cmd_fit(const Options& o, const std::vector<std::string>& args) {
  const MultiViewDataset ds = load_from(o);
  const EmbeddingResult result = fit(ds, model_config(o));
  log_iterations(result);
  json echo = run_echo("fit", args, o);
  echo["standardize"] = o.standardize;
  save_embedding(result, o.out, echo);
  return 0;
}

// --- baseline --------------------------------------------------------------

int cmd_baseline(const Options& o, const std::vector<std::string>& args) {
  const BaselineKind kind = parse_baseline_kind(o.kind);
  const MultiViewDataset ds = load_from(o);

  BaselineParams params;
  params.d = o.d;
  params.k = o.k;
  params.reg_eps = o.reg_eps;
  params.drop_trivial = !o.keep_trivial;
  params.laplacian.heat_sigma = o.heat_sigma;
  params.laplacian.binary = o.binary;
  params.view_index = o.view;
  const auto embeddings = run_baseline(kind, ds, params);

  ensure_dir(o.out);
  json meta = run_echo("baseline", args, o);
  meta["kind"] = std::string(to_string(kind));
  meta["config"] = {{"d", o.d}, {"k", o.k}, {"reg_eps", o.reg_eps ? json(*o.reg_eps) : json(nullptr)},
                    {"drop_trivial", !o.keep_trivial}, {"binary", o.binary},
                    {"heat_sigma", o.heat_sigma ? json(*o.heat_sigma) : json(nullptr)}};
  meta["embeddings"] = json::array();
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& e = embeddings[i];
    const std::string file = "embedding_" + std::to_string(i) + ".csv";
    csv::write_matrix(fs::path(o.out) / file, e.y.transpose());
    meta["embeddings"].push_back({{"name", e.name}, {"file", file},
                                  {"degenerate_subspace", e.degenerate_subspace},
                                  {"disconnected", e.disconnected}});
    if (e.disconnected) std::cerr << "warning: DisconnectedGraph in '" << e.name << "'\n";
  }
  write_json(fs::path(o.out) / "meta.json", meta);
  return 0;
}

// --- eval ------------------------------------------------------------------

SplitSpec split_from(const Options& o) {
  return {o.test_frac, o.repeats, derive_seed(o.seed, "eval/knn"), o.stratified};
}

int cmd_eval_knn(const Options& o, const std::vector<std::string>& args) {
  const Eigen::MatrixXd y = embedding_from(o);
  const std::vector<int> labels = labels_from(o);
  const ClassificationReport report = knn_classify_eval(y, labels, split_from(o));

  const json j = to_json(report);
  if (o.out.empty()) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  ensure_dir(o.out);
  write_json(fs::path(o.out) / "report.json", j);
  std::string table = "repeat,accuracy\n";
  for (std::size_t i = 0; i < report.accuracies.size(); ++i) {
    table += std::to_string(i) + "," + csv::format_double(report.accuracies[i]) + "\n";
  }
  csv::write_text(fs::path(o.out) / "report.csv", table);
  write_json(fs::path(o.out) / "meta.json", run_echo("eval knn", args, o));
  std::cout << "mean accuracy " << csv::format_double(report.summary.mean) << "\n";
  return 0;
}

RetrievalSpec retrieval_spec_from(const Options& o) {
  if (o.queries.empty()) throw Error(ErrorCode::InvalidArgument, "--queries is required");
  json j;
  try {
    j = json::parse(csv::read_text(o.queries));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "queries '" + o.queries + "': " + e.what());
  }
  RetrievalSpec spec;
  spec.top_k = o.top_k;
  try {
    spec.queries = j.at("queries").get<std::vector<std::size_t>>();
    if (j.contains("relevant") && !j["relevant"].is_null()) {
      spec.relevant = j["relevant"].get<std::vector<std::vector<std::size_t>>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "queries '" + o.queries + "': " + e.what());
  }
  if (spec.relevant.empty()) spec.relevant = relevant_by_label(labels_from(o), spec.queries);
  return spec;
}

int cmd_eval_retrieval(const Options& o, const std::vector<std::string>& args) {
  const Eigen::MatrixXd y = embedding_from(o);
  const RetrievalSpec spec = retrieval_spec_from(o);
  const RetrievalReport report = retrieval_eval(y, spec);

  const json j = to_json(report);
  if (o.out.empty()) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  ensure_dir(o.out);
  write_json(fs::path(o.out) / "report.json", j);
  std::string table = "query,precision,recall,average_precision\n";
  for (std::size_t i = 0; i < spec.queries.size(); ++i) {
    table += std::to_string(spec.queries[i]) + "," + csv::format_double(report.precision[i]) + "," +
             csv::format_double(report.recall[i]) + "," + csv::format_double(report.average_precision[i]) + "\n";
  }
  csv::write_text(fs::path(o.out) / "report.csv", table);
  if (!o.curve_k.empty()) {
    std::string curve = "k,precision,recall,f1\n";
    for (const auto& p : curves(y, spec, o.curve_k)) {
      curve += std::to_string(p.k) + "," + csv::format_double(p.precision) + "," +
               csv::format_double(p.recall) + "," + csv::format_double(p.f1) + "\n";
    }
    csv::write_text(fs::path(o.out) / "curves.csv", curve);
  }
  write_json(fs::path(o.out) / "meta.json", run_echo("eval retrieval", args, o));
  std::cout << "map " << csv::format_double(report.map) << "\n";
  return 0;
}

// --- sweep -----------------------------------------------------------------

struct SweepCell {
  double r;
  std::size_t k;
  std::size_t d;
  std::optional<EmbeddingResult> result;
  std::optional<ClassificationReport> report;
  std::string error;
};

int cmd_sweep(const Options& o, const std::vector<std::string>& args) {
  const MultiViewDataset ds = load_from(o);
  if (!ds.labels()) throw Error(ErrorCode::InvalidArgument, "sweep needs a dataset with labels");
  const std::vector<double> rs = o.r_grid.empty() ? std::vector<double>{o.r} : o.r_grid;
  const std::vector<std::size_t> ks = o.k_grid.empty() ? std::vector<std::size_t>{o.k} : o.k_grid;
  const std::vector<std::size_t> ds_ = o.d_grid.empty() ? std::vector<std::size_t>{o.d} : o.d_grid;

  std::vector<SweepCell> cells;
  for (double r : rs) {
    for (std::size_t k : ks) {
      for (std::size_t d : ds_) cells.push_back({r, k, d, std::nullopt, std::nullopt, {}});
    }
  }

  const SplitSpec split = split_from(o);
  parallel_for(cells.size(), [&](std::size_t i) {
    SweepCell& cell = cells[i];
    Options cell_opts = o;
    cell_opts.r = cell.r;
    cell_opts.k = cell.k;
    cell_opts.d = cell.d;
    try {
      cell.result = fit(ds, model_config(cell_opts));
      cell.report = knn_classify_eval(cell.result->y, *ds.labels(), split);
    } catch (const Error& e) {
      cell.error = std::string(to_string(e.code())) + ": " + e.what();
    }
  });

  ensure_dir(fs::path(o.out) / "traces");
  const std::size_t m = ds.view_count();
  std::string table = "cell,r,k,d,status,mean_accuracy,max_accuracy,iters_run,converged,final_objective";
  for (std::size_t v = 0; v < m; ++v) table += ",alpha_" + std::to_string(v + 1);
  table += ",alpha_dispersion,error\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& c = cells[i];
    table += std::to_string(i) + "," + csv::format_double(c.r) + "," + std::to_string(c.k) + "," +
             std::to_string(c.d) + ",";
    if (!c.result) {
      table += "failed,,,,,";
      for (std::size_t v = 0; v < m; ++v) table += ",";
      table += "," + csv_quote(c.error) + "\n";
      continue;
    }
    const EmbeddingResult& res = *c.result;
    table += "ok," + csv::format_double(c.report->summary.mean) + "," + csv::format_double(c.report->summary.max) +
             "," + std::to_string(res.iters_run) + "," + (res.converged ? "true" : "false") + "," +
             csv::format_double(res.objective_trace.back());
    double dispersion = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
      const double a = res.alpha[static_cast<Eigen::Index>(v)];
      table += "," + csv::format_double(a);
      dispersion = std::max(dispersion, std::abs(a - 1.0 / static_cast<double>(m)));
    }
    table += "," + csv::format_double(dispersion) + ",\n";
    write_trace_csv(res, fs::path(o.out) / "traces" / ("cell_" + std::to_string(i) + ".csv"));
  }
  csv::write_text(fs::path(o.out) / "sweep.csv", table);
  json meta = run_echo("sweep", args, o);
  meta["base_config"] = config_to_json(model_config(o));
  meta["grid"] = {{"r", rs}, {"k", ks}, {"d", ds_}};
  write_json(fs::path(o.out) / "meta.json", meta);
  return 0;
}

// --- trace -----------------------------------------------------------------

int cmd_trace(const Options& o, const std::vector<std::string>&) {
  if (o.run_dir.empty()) throw Error(ErrorCode::InvalidArgument, "--run is required");
  const EmbeddingResult result = load_embedding(o.run_dir);
  const fs::path out = o.out.empty() ? fs::path(o.run_dir) / "trace.csv" : fs::path(o.out);
  write_trace_csv(result, out);
  std::cout << out.string() << "\n";
  return 0;
}

// --- wiring ----------------------------------------------------------------

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--manifest", o.manifest, "Dataset manifest (JSON)");
  cmd->add_flag("--header", o.header, "Skip one header line in every CSV");
  cmd->add_flag("--standardize", o.standardize, "Z-score every feature within its view");
}

void add_model_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--d", o.d, "Embedding dimension")->capture_default_str();
  cmd->add_option("--k", o.k, "Neighbors per sample")->capture_default_str();
  cmd->add_option("--reg-eps", o.reg_eps, "Gram ridge (default: 1e-3 if k > D_v, else 1e-12)");
  cmd->add_flag("--keep-trivial", o.keep_trivial, "Keep the constant eigenvector");
}

void add_output(CLI::App* cmd, Options& o, bool required) {
  auto* opt = cmd->add_option("--out", o.out, "Output directory");
  if (required) opt->required();
}

void add_split_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--repeats", o.repeats, "Random splits")->capture_default_str();
  cmd->add_option("--test-frac", o.test_frac, "Test fraction per split")->capture_default_str();
  cmd->add_flag("--stratified", o.stratified, "Draw the test fold per class");
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Multi-view reconstructive embedding", "mvembed"};
  app.set_version_flag("--version", MVEMBED_VERSION);
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Global seed")->capture_default_str();
  std::string simd;
  app.add_option("--simd", simd, "Force kernel ISA: scalar, avx2 or neon");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset");
  synth->add_option("--n", o.n, "Samples")->capture_default_str();
  synth->add_option("--classes", o.classes, "Classes")->capture_default_str();
  synth->add_option("--sigma", o.sigma, "Per-feature noise")->capture_default_str();
  synth->add_option("--separation", o.separation, "Radius of the class circle")->capture_default_str();
  synth->add_option("--dims", o.dims, "Per-view dimensions")->delimiter(',')->capture_default_str();
  synth->add_option("--signal", o.signals, "Per-view latent scaling 'x,y' (repeat per view)");
  synth->add_option("--seed", o.seed, "Seed");
  add_output(synth, o, true);

  auto* fit_cmd = app.add_subcommand("fit", "Fit the multi-view embedding");
  add_data_options(fit_cmd, o);
  add_model_options(fit_cmd, o);
  fit_cmd->add_option("--r", o.r, "View-weight exponent (> 1)")->capture_default_str();
  fit_cmd->add_option("--tol", o.tol, "Relative objective tolerance")->capture_default_str();
  fit_cmd->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
  fit_cmd->add_option("--seed", o.seed, "Seed");
  add_output(fit_cmd, o, true);

  auto* baseline = app.add_subcommand("baseline", "Run a single-view or concatenated baseline");
  baseline->add_option("--kind", o.kind, "slle | fclle | sle | fcle")->required();
  add_data_options(baseline, o);
  add_model_options(baseline, o);
  baseline->add_option("--heat-sigma", o.heat_sigma, "Heat kernel width (default: median kNN distance)");
  baseline->add_flag("--binary", o.binary, "0/1 graph weights for sle/fcle");
  baseline->add_option("--view", o.view, "Only this view index (single-view kinds)");
  baseline->add_option("--seed", o.seed, "Seed");
  add_output(baseline, o, true);

  auto* eval = app.add_subcommand("eval", "Evaluate an embedding");
  eval->require_subcommand(1);
  auto* eval_knn = eval->add_subcommand("knn", "1NN accuracy over random splits");
  eval_knn->add_option("--embedding", o.embedding, "Embedding CSV (one sample per row)")->required();
  eval_knn->add_option("--labels", o.labels, "Labels CSV");
  eval_knn->add_option("--manifest", o.manifest, "Take labels from this manifest");
  eval_knn->add_flag("--header", o.header, "Skip one header line in CSV inputs");
  add_split_options(eval_knn, o);
  eval_knn->add_option("--seed", o.seed, "Seed");
  add_output(eval_knn, o, false);

  auto* eval_ret = eval->add_subcommand("retrieval", "l1 retrieval precision/recall/MAP/F1");
  eval_ret->add_option("--embedding", o.embedding, "Embedding CSV (one sample per row)")->required();
  eval_ret->add_option("--queries", o.queries, "Queries JSON")->required();
  eval_ret->add_option("--labels", o.labels, "Labels CSV for label-derived relevance");
  eval_ret->add_option("--manifest", o.manifest, "Take labels from this manifest");
  eval_ret->add_flag("--header", o.header, "Skip one header line in CSV inputs");
  eval_ret->add_option("--top-k", o.top_k, "Cut-off for precision/recall")->capture_default_str();
  eval_ret->add_option("--curve-k", o.curve_k, "Also write curves.csv for these K")->delimiter(',');
  eval_ret->add_option("--seed", o.seed, "Seed");
  add_output(eval_ret, o, false);

  auto* sweep = app.add_subcommand("sweep", "Grid of fits + 1NN evaluation");
  add_data_options(sweep, o);
  sweep->add_option("--r", o.r_grid, "r values")->delimiter(',');
  sweep->add_option("--k", o.k_grid, "k values")->delimiter(',');
  sweep->add_option("--d", o.d_grid, "d values")->delimiter(',');
  sweep->add_option("--reg-eps", o.reg_eps, "Gram ridge");
  sweep->add_flag("--keep-trivial", o.keep_trivial, "Keep the constant eigenvector");
  sweep->add_option("--tol", o.tol, "Relative objective tolerance")->capture_default_str();
  sweep->add_option("--max-iters", o.max_iters, "Iteration cap")->capture_default_str();
  add_split_options(sweep, o);
  sweep->add_option("--seed", o.seed, "Seed");
  add_output(sweep, o, true);

  auto* trace = app.add_subcommand("trace", "Export the convergence trace of a fit");
  trace->add_option("--run", o.run_dir, "Output directory of a fit")->required();
  trace->add_option("--out", o.out, "Trace CSV (default: <run>/trace.csv)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "mvembed: error[Usage]: " << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorCategory::Usage);
  }

  try {
    if (!simd.empty()) {
      bool found = false;
      for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2, kernels::Isa::Neon}) {
        if (simd == kernels::to_string(isa)) {
          kernels::set_active_isa(isa);
          found = true;
        }
      }
      if (!found) throw Error(ErrorCode::InvalidArgument, "unknown --simd '" + simd + "'");
    }
    if (*synth) return cmd_synth(o, args);
    if (*fit_cmd) return cmd_fit(o, args);
    if (*baseline) return cmd_baseline(o, args);
    if (*eval_knn) return cmd_eval_knn(o, args);
    if (*eval_ret) return cmd_eval_retrieval(o, args);
    if (*sweep) return cmd_sweep(o, args);
    if (*trace) return cmd_trace(o, args);
  } catch (const Error& e) {
    std::cerr << "mvembed: error[" << to_string(e.code()) << "]: " << one_line(e.what()) << "\n";
    return static_cast<int>(category(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "mvembed: error[Internal]: " << one_line(e.what()) << "\n";
    return static_cast<int>(ErrorCategory::Data);
  }
  return static_cast<int>(ErrorCategory::Usage);
}

}  // namespace mvembed::cli
