#include "mvembed/result_io.hpp"

#include "mvembed/csv.hpp"
#include "mvembed/error.hpp"

namespace mvembed {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_array(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd from_array(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

json config_to_json(const MrpeConfig& config) {
  return {{"d", config.d},
          {"k", config.k},
          {"r", config.r},
          {"reg_eps", config.reg_eps ? json(*config.reg_eps) : json(nullptr)},
          {"max_iters", config.max_iters},
          {"tol", config.tol},
          {"drop_trivial", config.drop_trivial}};
}

MrpeConfig config_from_json(const json& j) {
  MrpeConfig c;
  c.d = j.at("d").get<std::size_t>();
  c.k = j.at("k").get<std::size_t>();
  c.r = j.at("r").get<double>();
  if (j.contains("reg_eps") && !j["reg_eps"].is_null()) c.reg_eps = j["reg_eps"].get<double>();
  c.max_iters = j.at("max_iters").get<std::size_t>();
  c.tol = j.at("tol").get<double>();
  c.drop_trivial = j.at("drop_trivial").get<bool>();
  return c;
}

void save_embedding(const EmbeddingResult& result, const fs::path& dir, const json& run) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "'");
  }

  csv::write_matrix(dir / "embedding.csv", result.y.transpose());

  json alpha_trace = json::array();
  for (const auto& a : result.alpha_trace) alpha_trace.push_back(to_array(a));
  json meta = {
      {"tool", "mvembed"},
      {"config", config_to_json(result.config)},
      {"view_names", result.view_names},
      {"n", result.y.cols()},
      {"d", result.y.rows()},
      {"alpha", to_array(result.alpha)},
      {"objective_trace", result.objective_trace},
      {"alpha_trace", alpha_trace},
      {"per_view_traces", to_array(result.per_view_traces)},
      {"eigenvalues", to_array(result.eigenvalues)},
      {"iters_run", result.iters_run},
      {"converged", result.converged},
      {"degenerate_subspace", result.degenerate_subspace},
      {"iteration_seconds", result.iteration_seconds},
      {"setup_seconds", result.setup_seconds},
      {"wall_time_seconds", result.wall_time_seconds},
  };
  if (!run.is_null()) meta["run"] = run;
  csv::write_text(dir / "meta.json", meta.dump(2) + "\n");
}

EmbeddingResult load_embedding(const fs::path& dir) {
  json meta;
  try {
    meta = json::parse(csv::read_text(dir / "meta.json"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "'" + (dir / "meta.json").string() + "': " + e.what());
  }

  EmbeddingResult r;
  try {
    r.config = config_from_json(meta.at("config"));
    r.view_names = meta.at("view_names").get<std::vector<std::string>>();
    r.alpha = from_array(meta.at("alpha"));
    r.objective_trace = meta.at("objective_trace").get<std::vector<double>>();
    for (const auto& a : meta.at("alpha_trace")) r.alpha_trace.push_back(from_array(a));
    r.per_view_traces = from_array(meta.at("per_view_traces"));
    r.eigenvalues = from_array(meta.at("eigenvalues"));
    r.iters_run = meta.at("iters_run").get<std::size_t>();
    r.converged = meta.at("converged").get<bool>();
    r.degenerate_subspace = meta.at("degenerate_subspace").get<bool>();
    r.iteration_seconds = meta.at("iteration_seconds").get<std::vector<double>>();
    r.setup_seconds = meta.at("setup_seconds").get<double>();
    r.wall_time_seconds = meta.at("wall_time_seconds").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "'" + (dir / "meta.json").string() + "': " + e.what());
  }
  r.y = csv::read_matrix(dir / "embedding.csv").transpose();
  return r;
}

void write_trace_csv(const EmbeddingResult& result, const fs::path& path) {
  const std::size_t m = static_cast<std::size_t>(result.alpha.size());
  std::string out = "iteration,objective";
  for (std::size_t v = 0; v < m; ++v) out += ",alpha_" + std::to_string(v + 1);
  out += ",seconds\n";
  for (std::size_t t = 0; t < result.iters_run; ++t) {
    out += std::to_string(t + 1) + "," + csv::format_double(result.objective_trace[t]);
    for (std::size_t v = 0; v < m; ++v) {
      out += "," + csv::format_double(result.alpha_trace[t][static_cast<Eigen::Index>(v)]);
    }
    const double secs = t < result.iteration_seconds.size() ? result.iteration_seconds[t] : 0.0;
    out += "," + csv::format_double(secs) + "\n";
  }
  csv::write_text(path, out);
}

}  // namespace mvembed
