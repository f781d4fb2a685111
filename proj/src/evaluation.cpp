#include "mvembed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "mvembed/error.hpp"
#include "mvembed/kernels.hpp"
#include "mvembed/random.hpp"

namespace mvembed {
namespace {

std::span<const double> column(const Eigen::MatrixXd& m, std::size_t j) {
  return {m.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(m.rows())};
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct PreparedRetrieval {
  std::vector<std::size_t> corpus;
  std::vector<std::vector<std::size_t>> rankings;
};

PreparedRetrieval prepare(const Eigen::MatrixXd& embedding, const RetrievalSpec& spec) {
  const std::size_t n = static_cast<std::size_t>(embedding.cols());
  if (spec.queries.empty()) throw Error(ErrorCode::InvalidSpec, "retrieval needs at least one query");
  if (spec.relevant.size() != spec.queries.size()) {
    throw Error(ErrorCode::InvalidSpec, "one relevant set is required per query");
  }
  if (spec.top_k < 1) throw Error(ErrorCode::InvalidSpec, "top_k must be >= 1");

  std::vector<char> is_query(n, 0);
  for (std::size_t q : spec.queries) {
    if (q >= n) throw Error(ErrorCode::InvalidSpec, "query id " + std::to_string(q) + " out of range");
    is_query[q] = 1;
  }
  PreparedRetrieval out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_query[i]) out.corpus.push_back(i);
  }
  if (out.corpus.empty()) throw Error(ErrorCode::InvalidSpec, "every sample is a query; corpus is empty");

  for (std::size_t qi = 0; qi < spec.queries.size(); ++qi) {
    const auto& rel = spec.relevant[qi];
    if (rel.empty()) {
      throw Error(ErrorCode::EmptyRelevantSet,
                  "query " + std::to_string(spec.queries[qi]) + " has no relevant items");
    }
    for (std::size_t id : rel) {
      if (id >= n || is_query[id]) {
        throw Error(ErrorCode::InvalidSpec, "relevant id " + std::to_string(id) + " of query " +
                                                std::to_string(spec.queries[qi]) +
                                                " is not a corpus sample");
      }
    }
    out.rankings.push_back(rank_by_l1(embedding, spec.queries[qi], out.corpus));
  }
  return out;
}

std::size_t hits_at(std::span<const std::size_t> ranking, const std::set<std::size_t>& relevant,
                    std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t p = 0; p < k && p < ranking.size(); ++p) hits += relevant.count(ranking[p]);
  return hits;
}

}  // namespace

Summary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Summary s;
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.min = sorted.front();
  s.q1 = quantile(sorted, 0.25);
  s.median = quantile(sorted, 0.5);
  s.q3 = quantile(sorted, 0.75);
  s.max = sorted.back();
  return s;
}

ClassificationReport knn_classify_eval(const Eigen::MatrixXd& embedding, std::span<const int> labels,
                                       const SplitSpec& split) {
  const std::size_t n = static_cast<std::size_t>(embedding.cols());
  if (labels.size() != n) {
    throw Error(ErrorCode::MismatchedSampleCount, "labels have " + std::to_string(labels.size()) +
                                                      " entries, embedding has " + std::to_string(n));
  }
  if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  if (split.n_repeats < 1) throw Error(ErrorCode::InvalidArgument, "need at least one repeat");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < 2) {
      throw Error(ErrorCode::TooFewSamples, "class " + std::to_string(label) + " has " +
                                                std::to_string(members.size()) + " sample(s); need 2");
    }
  }

  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(split.test_fraction * static_cast<double>(n))), 1, n - 1);

  ClassificationReport report;
  for (std::size_t rep = 0; rep < split.n_repeats; ++rep) {
    Rng rng(derive_seed(split.seed, "split/" + std::to_string(rep)));
    std::vector<char> in_test(n, 0);
    if (split.stratified) {
      for (const auto& [label, members] : by_class) {
        std::vector<std::size_t> shuffled = members;
        rng.shuffle(shuffled);
        const auto take = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(split.test_fraction * static_cast<double>(members.size()))),
            1, members.size() - 1);
        for (std::size_t t = 0; t < take; ++t) in_test[shuffled[t]] = 1;
      }
    } else {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t t = 0; t < n_test; ++t) in_test[order[t]] = 1;
    }

    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test : train).push_back(i);

    std::size_t correct = 0;
    for (std::size_t t : test) {
      std::size_t best = train.front();
      double best_dist = kernels::squared_l2(column(embedding, t), column(embedding, best));
      for (std::size_t c = 1; c < train.size(); ++c) {
        const double dist = kernels::squared_l2(column(embedding, t), column(embedding, train[c]));
        if (dist < best_dist) {
          best_dist = dist;
          best = train[c];
        }
      }
      correct += labels[best] == labels[t];
    }
    report.accuracies.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
    report.test_size = test.size();
  }
  report.summary = summarize(report.accuracies);
  return report;
}

std::vector<std::vector<std::size_t>> relevant_by_label(std::span<const int> labels,
                                                        std::span<const std::size_t> queries) {
  const std::set<std::size_t> query_set(queries.begin(), queries.end());
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t q : queries) {
    if (q >= labels.size()) throw Error(ErrorCode::InvalidSpec, "query id " + std::to_string(q) + " out of range");
    std::vector<std::size_t> rel;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!query_set.count(i) && labels[i] == labels[q]) rel.push_back(i);
    }
    out.push_back(std::move(rel));
  }
  return out;
}

std::vector<std::size_t> rank_by_l1(const Eigen::MatrixXd& embedding, std::size_t query,
                                    std::span<const std::size_t> corpus) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(corpus.size());
  for (std::size_t id : corpus) scored.emplace_back(kernels::l1(column(embedding, query), column(embedding, id)), id);
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> ranking;
  ranking.reserve(scored.size());
  for (const auto& [dist, id] : scored) ranking.push_back(id);
  return ranking;
}

double average_precision(std::span<const std::size_t> ranking, std::span<const std::size_t> relevant) {
  if (relevant.empty()) throw Error(ErrorCode::EmptyRelevantSet, "average precision of an empty relevant set");
  const std::set<std::size_t> rel(relevant.begin(), relevant.end());
  double sum = 0.0;
  std::size_t found = 0;
  for (std::size_t p = 0; p < ranking.size(); ++p) {
    if (rel.count(ranking[p])) {
      ++found;
      sum += static_cast<double>(found) / static_cast<double>(p + 1);
    }
  }
  return sum / static_cast<double>(rel.size());
}

RetrievalReport retrieval_eval(const Eigen::MatrixXd& embedding, const RetrievalSpec& spec) {
  const PreparedRetrieval prep = prepare(embedding, spec);
  const std::size_t k = std::min(spec.top_k, prep.corpus.size());

  RetrievalReport report;
  report.top_k = k;
  for (std::size_t qi = 0; qi < spec.queries.size(); ++qi) {
    const std::set<std::size_t> rel(spec.relevant[qi].begin(), spec.relevant[qi].end());
    const std::size_t hits = hits_at(prep.rankings[qi], rel, k);
    report.precision.push_back(static_cast<double>(hits) / static_cast<double>(k));
    report.recall.push_back(static_cast<double>(hits) / static_cast<double>(rel.size()));
    report.average_precision.push_back(average_precision(prep.rankings[qi], spec.relevant[qi]));
  }
  const double q = static_cast<double>(spec.queries.size());
  report.mean_precision = std::accumulate(report.precision.begin(), report.precision.end(), 0.0) / q;
  report.mean_recall = std::accumulate(report.recall.begin(), report.recall.end(), 0.0) / q;
  report.map = std::accumulate(report.average_precision.begin(), report.average_precision.end(), 0.0) / q;
  report.f1 = harmonic(report.mean_precision, report.mean_recall);
  report.ap_summary = summarize(report.average_precision);
  return report;
}

std::vector<CurvePoint> curves(const Eigen::MatrixXd& embedding, const RetrievalSpec& spec,
                               std::span<const std::size_t> k_values) {
  const PreparedRetrieval prep = prepare(embedding, spec);
  std::vector<std::set<std::size_t>> rel;
  for (const auto& r : spec.relevant) rel.emplace_back(r.begin(), r.end());

  std::vector<CurvePoint> out;
  const double q = static_cast<double>(spec.queries.size());
  for (std::size_t requested : k_values) {
    if (requested < 1) throw Error(ErrorCode::InvalidSpec, "curve K values must be >= 1");
    const std::size_t k = std::min(requested, prep.corpus.size());
    CurvePoint point{k, 0.0, 0.0, 0.0};
    for (std::size_t qi = 0; qi < spec.queries.size(); ++qi) {
      const std::size_t hits = hits_at(prep.rankings[qi], rel[qi], k);
      point.precision += static_cast<double>(hits) / static_cast<double>(k) / q;
      point.recall += static_cast<double>(hits) / static_cast<double>(rel[qi].size()) / q;
    }
    point.f1 = harmonic(point.precision, point.recall);
    out.push_back(point);
  }
  return out;
}

nlohmann::json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

nlohmann::json to_json(const ClassificationReport& r) {
  return {{"kind", "knn"},
          {"accuracies", r.accuracies},
          {"test_size", r.test_size},
          {"mean", r.summary.mean},
          {"max", r.summary.max},
          {"boxplot", to_json(r.summary)}};
}

nlohmann::json to_json(const RetrievalReport& r) {
  return {{"kind", "retrieval"},
          {"top_k", r.top_k},
          {"precision", r.mean_precision},
          {"recall", r.mean_recall},
          {"map", r.map},
          {"f1", r.f1},
          {"per_query",
           {{"precision", r.precision}, {"recall", r.recall}, {"average_precision", r.average_precision}}},
          {"ap_boxplot", to_json(r.ap_summary)}};
}

}  // namespace mvembed
