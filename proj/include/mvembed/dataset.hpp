#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mvembed {

/// One feature view: `data` is D_v x n, one sample per column.
struct ViewMatrix {
  Eigen::MatrixXd data;
  std::string name;

  std::size_t dim() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t samples() const { return static_cast<std::size_t>(data.cols()); }
};

/// n samples seen through m views of differing dimensionality.
///
/// Construct through make() so the invariants are checked once: at least one
/// view, equal column counts, finite values, and label/id lengths equal to n.
class MultiViewDataset {
 public:
  static MultiViewDataset make(std::vector<ViewMatrix> views,
                               std::optional<std::vector<int>> labels = std::nullopt,
                               std::optional<std::vector<std::string>> sample_ids = std::nullopt);

  const std::vector<ViewMatrix>& views() const { return views_; }
  const ViewMatrix& view(std::size_t v) const { return views_.at(v); }
  std::size_t view_count() const { return views_.size(); }
  std::size_t n() const { return n_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  const std::optional<std::vector<std::string>>& sample_ids() const { return sample_ids_; }

  bool operator==(const MultiViewDataset&) const;

 private:
  MultiViewDataset() = default;

  std::vector<ViewMatrix> views_;
  std::size_t n_ = 0;
  std::optional<std::vector<int>> labels_;
  std::optional<std::vector<std::string>> sample_ids_;
};

enum class Layout { SamplesAsRows, SamplesAsColumns };

struct ManifestView {
  std::string name;
  std::filesystem::path path;
};

/// Describes a dataset on disk. JSON form:
///   {"views":[{"name":str,"path":str}], "labels":str|null, "layout":"rows"|"cols"}
/// with an optional "ids" path. Relative paths resolve against the manifest's
/// directory.
struct Manifest {
  std::vector<ManifestView> views;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> ids;
  Layout layout = Layout::SamplesAsRows;
  bool header = false;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

MultiViewDataset load_dataset(const Manifest& manifest);

/// Writes every view as `<dir>/<name>.csv` (samples as rows), labels/ids when
/// present, and `<dir>/manifest.json`. Returns the manifest path.
std::filesystem::path save_dataset(const MultiViewDataset& dataset, const std::filesystem::path& dir);

/// Per-feature z-scoring within each view. Constant features are centered only.
MultiViewDataset standardize(const MultiViewDataset& dataset);

}  // namespace mvembed
