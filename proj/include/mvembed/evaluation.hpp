#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace mvembed {

/// Mean, max and boxplot quantiles (linear interpolation between order
/// statistics) of a list of rates.
struct Summary {
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

struct SplitSpec {
  double test_fraction = 0.2;
  std::size_t n_repeats = 20;
  std::uint64_t seed = 0;
  /// Draw the test fold per class instead of over all samples.
  bool stratified = false;
};

struct ClassificationReport {
  std::vector<double> accuracies;  ///< one per repeat
  Summary summary;
  std::size_t test_size = 0;
};

/// Repeated random train/test splits with a Euclidean 1NN classifier in the
/// embedding space (d x n, one sample per column). Nearest-neighbor ties go to
/// the lower sample index. Throws TooFewSamples when any class has fewer than
/// two samples.
ClassificationReport knn_classify_eval(const Eigen::MatrixXd& embedding, std::span<const int> labels,
                                       const SplitSpec& split);

struct RetrievalSpec {
  std::vector<std::size_t> queries;
  std::vector<std::vector<std::size_t>> relevant;  ///< one set per query
  std::size_t top_k = 2;
};

/// Relevant set of each query: the non-query samples sharing its label.
std::vector<std::vector<std::size_t>> relevant_by_label(std::span<const int> labels,
                                                        std::span<const std::size_t> queries);

struct RetrievalReport {
  std::size_t top_k = 0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> average_precision;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double map = 0.0;
  /// Harmonic mean of mean_precision and mean_recall (0 when both are 0).
  double f1 = 0.0;
  Summary ap_summary;
};

/// Ranks the corpus (every sample that is not a query) by ascending l1
/// distance to each query, ties to the lower index. Precision and recall are
/// taken at top_k; average precision runs over the full ranking.
/// Throws EmptyRelevantSet, or InvalidSpec for ids outside the corpus.
RetrievalReport retrieval_eval(const Eigen::MatrixXd& embedding, const RetrievalSpec& spec);

/// Corpus indices sorted by ascending l1 distance to `query`.
std::vector<std::size_t> rank_by_l1(const Eigen::MatrixXd& embedding, std::size_t query,
                                    std::span<const std::size_t> corpus);

/// (1/|R|) * sum over relevant items of (#relevant at or above it) / position.
double average_precision(std::span<const std::size_t> ranking, std::span<const std::size_t> relevant);

struct CurvePoint {
  std::size_t k = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::vector<CurvePoint> curves(const Eigen::MatrixXd& embedding, const RetrievalSpec& spec,
                               std::span<const std::size_t> k_values);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const ClassificationReport& r);
nlohmann::json to_json(const RetrievalReport& r);

}  // namespace mvembed
