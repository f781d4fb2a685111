#include "mvembed/dataset.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "json.hpp"

#include "mvembed/csv.hpp"
#include "mvembed/error.hpp"

namespace mvembed {
namespace fs = std::filesystem;
using nlohmann::json;

MultiViewDataset MultiViewDataset::make(std::vector<ViewMatrix> views,
                                        std::optional<std::vector<int>> labels,
                                        std::optional<std::vector<std::string>> sample_ids) {
  if (views.empty()) throw Error(ErrorCode::InvalidSpec, "dataset needs at least one view");
  const std::size_t n = views.front().samples();
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& view = views[v];
    if (view.dim() < 1) {
      throw Error(ErrorCode::InvalidSpec, "view '" + view.name + "' has no features");
    }
    if (view.samples() != n) {
      throw Error(ErrorCode::MismatchedSampleCount,
                  "view '" + view.name + "' has " + std::to_string(view.samples()) +
                      " samples, expected " + std::to_string(n));
    }
    for (Eigen::Index c = 0; c < view.data.cols(); ++c) {
      for (Eigen::Index r = 0; r < view.data.rows(); ++r) {
        if (!std::isfinite(view.data(r, c))) {
          throw Error(ErrorCode::NonFiniteValue, "view '" + view.name + "' feature " +
                                                     std::to_string(r) + " sample " +
                                                     std::to_string(c) + ": non-finite value");
        }
      }
    }
  }
  if (labels && labels->size() != n) {
    throw Error(ErrorCode::MismatchedSampleCount, "labels have " + std::to_string(labels->size()) +
                                                      " entries, expected " + std::to_string(n));
  }
  if (sample_ids && sample_ids->size() != n) {
    throw Error(ErrorCode::MismatchedSampleCount,
                "sample ids have " + std::to_string(sample_ids->size()) + " entries, expected " +
                    std::to_string(n));
  }

  MultiViewDataset ds;
  ds.views_ = std::move(views);
  ds.n_ = n;
  ds.labels_ = std::move(labels);
  ds.sample_ids_ = std::move(sample_ids);
  return ds;
}

bool MultiViewDataset::operator==(const MultiViewDataset& other) const {
  if (n_ != other.n_ || views_.size() != other.views_.size()) return false;
  if (labels_ != other.labels_ || sample_ids_ != other.sample_ids_) return false;
  for (std::size_t v = 0; v < views_.size(); ++v) {
    if (views_[v].name != other.views_[v].name) return false;
    if (views_[v].data.rows() != other.views_[v].data.rows()) return false;
    if (views_[v].data != other.views_[v].data) return false;
  }
  return true;
}

Manifest read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(csv::read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "manifest '" + path.string() + "': " + e.what());
  }

  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };

  Manifest m;
  try {
    for (const auto& v : j.at("views")) {
      m.views.push_back({v.value("name", "view" + std::to_string(m.views.size())),
                         resolve(v.at("path").get<std::string>())});
    }
    if (j.contains("labels") && !j["labels"].is_null()) m.labels = resolve(j["labels"].get<std::string>());
    if (j.contains("ids") && !j["ids"].is_null()) m.ids = resolve(j["ids"].get<std::string>());
    const std::string layout = j.value("layout", "rows");
    if (layout == "rows") {
      m.layout = Layout::SamplesAsRows;
    } else if (layout == "cols") {
      m.layout = Layout::SamplesAsColumns;
    } else {
      throw Error(ErrorCode::Parse, "manifest '" + path.string() + "': unknown layout '" + layout + "'");
    }
    m.header = j.value("header", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "manifest '" + path.string() + "': " + e.what());
  }
  if (m.views.empty()) throw Error(ErrorCode::Parse, "manifest '" + path.string() + "' lists no views");
  return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  json views = json::array();
  for (const auto& v : manifest.views) views.push_back({{"name", v.name}, {"path", v.path.generic_string()}});
  json j;
  j["views"] = views;
  j["labels"] = manifest.labels ? json(manifest.labels->generic_string()) : json(nullptr);
  if (manifest.ids) j["ids"] = manifest.ids->generic_string();
  j["layout"] = manifest.layout == Layout::SamplesAsRows ? "rows" : "cols";
  if (manifest.header) j["header"] = true;
  csv::write_text(path, j.dump(2) + "\n");
}

MultiViewDataset load_dataset(const Manifest& manifest) {
  if (manifest.views.empty()) throw Error(ErrorCode::InvalidSpec, "manifest lists no views");
  const csv::ReadOptions opts{manifest.header};

  std::vector<ViewMatrix> views;
  for (const auto& entry : manifest.views) {
    if (!fs::exists(entry.path)) {
      throw Error(ErrorCode::Io, "view file '" + entry.path.string() + "' does not exist");
    }
    Eigen::MatrixXd m = csv::read_matrix(entry.path, opts, entry.name);
    if (manifest.layout == Layout::SamplesAsRows) m.transposeInPlace();
    views.push_back({std::move(m), entry.name});
  }

  std::optional<std::vector<int>> labels;
  if (manifest.labels) {
    if (!fs::exists(*manifest.labels)) {
      throw Error(ErrorCode::Io, "labels file '" + manifest.labels->string() + "' does not exist");
    }
    labels = csv::read_labels(*manifest.labels, opts);
  }
  std::optional<std::vector<std::string>> ids;
  if (manifest.ids) ids = csv::read_lines(*manifest.ids, opts);

  return MultiViewDataset::make(std::move(views), std::move(labels), std::move(ids));
}

fs::path save_dataset(const MultiViewDataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());

  Manifest manifest;
  std::set<std::string> used;
  for (std::size_t v = 0; v < dataset.view_count(); ++v) {
    const auto& view = dataset.view(v);
    std::string file = view.name.empty() ? "view" + std::to_string(v) : view.name;
    for (char& c : file) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    if (!used.insert(file).second) file += "_" + std::to_string(v);
    file += ".csv";
    csv::write_matrix(dir / file, view.data.transpose());
    manifest.views.push_back({view.name, file});
  }
  if (dataset.labels()) {
    csv::write_labels(dir / "labels.csv", *dataset.labels());
    manifest.labels = "labels.csv";
  }
  if (dataset.sample_ids()) {
    std::string out;
    for (const auto& id : *dataset.sample_ids()) out += id + "\n";
    csv::write_text(dir / "ids.txt", out);
    manifest.ids = "ids.txt";
  }
  const fs::path manifest_path = dir / "manifest.json";
  write_manifest(manifest_path, manifest);
  return manifest_path;
}

MultiViewDataset standardize(const MultiViewDataset& dataset) {
  std::vector<ViewMatrix> views;
  for (const auto& view : dataset.views()) {
    Eigen::MatrixXd x = view.data;
    const double n = static_cast<double>(x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double mean = x.row(r).sum() / n;
      x.row(r).array() -= mean;
      const double sd = std::sqrt(x.row(r).squaredNorm() / n);
      if (sd > 0.0) x.row(r) /= sd;
    }
    views.push_back({std::move(x), view.name});
  }
  return MultiViewDataset::make(std::move(views), dataset.labels(), dataset.sample_ids());
}

}  // namespace mvembed
