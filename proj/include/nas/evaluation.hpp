#pragma once

// k-NN outlier scoring over embeddings and ROC AUC.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nas/data.hpp"
#include "nas/error.hpp"
#include "nas/numeric.hpp"

namespace nas {

enum class DistanceMetric { Euclidean, Cosine };
enum class KnnScoring { KthDistance, MeanOfK };

inline const char* metric_name(DistanceMetric m) { return m == DistanceMetric::Cosine ? "cosine" : "euclidean"; }

inline DistanceMetric metric_from_name(const std::string& s) {
  if (s == "euclidean") return DistanceMetric::Euclidean;
  if (s == "cosine") return DistanceMetric::Cosine;
  throw ConfigError("unknown distance metric '" + s + "' (expected euclidean|cosine)");
}

inline const char* scoring_name(KnnScoring s) { return s == KnnScoring::MeanOfK ? "mean" : "kth"; }

inline KnnScoring scoring_from_name(const std::string& s) {
  if (s == "kth") return KnnScoring::KthDistance;
  if (s == "mean") return KnnScoring::MeanOfK;
  throw ConfigError("unknown k-NN scoring '" + s + "' (expected kth|mean)");
}

inline double distance(const Vector& a, const Vector& b, DistanceMetric metric) {
  if (metric == DistanceMetric::Euclidean) {
    // Sequential sum: the result does not depend on SIMD width.
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += (a(i) - b(i)) * (a(i) - b(i));
    return std::sqrt(s);
  }
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - a.dot(b) / (na * nb);
}

namespace detail {

inline void check_cloud(const std::vector<Vector>& points, std::size_t k) {
  if (points.empty()) throw InputDomainError("k-NN: no points");
  if (k == 0) throw InputDomainError("k-NN: k must be >= 1");
  if (k >= points.size())
    throw InputDomainError("k-NN: k=" + std::to_string(k) + " must be smaller than n=" + std::to_string(points.size()));
  const auto dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw InputDomainError("k-NN: embeddings do not share one dimension");
}

}  // namespace detail

/// For each point, its `kmax` smallest distances to other points, ascending.
inline std::vector<std::vector<double>> nearest_distances(const std::vector<Vector>& points, std::size_t kmax,
                                                          DistanceMetric metric = DistanceMetric::Euclidean) {
  detail::check_cloud(points, kmax);
  const std::size_t n = points.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = distance(points[i], points[j], metric);
  std::vector<std::vector<double>> out(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(dist[i * n + j]);
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kmax), row.end());
    out[i].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kmax));
  }
  return out;
}

inline std::vector<double> scores_from_neighbors(const std::vector<std::vector<double>>& neighbors, std::size_t k,
                                                 KnnScoring scoring = KnnScoring::KthDistance) {
  std::vector<double> scores;
  scores.reserve(neighbors.size());
  for (const auto& nb : neighbors) {
    if (k == 0 || k > nb.size()) throw InputDomainError("k-NN: k exceeds the precomputed neighbor count");
    if (scoring == KnnScoring::KthDistance) {
      scores.push_back(nb[k - 1]);
    } else {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += nb[j];
      scores.push_back(s / static_cast<double>(k));
    }
  }
  return scores;
}

/// score_i = distance from point i to its k-th nearest other point (exact).
inline std::vector<double> knn_outlier_scores(const std::vector<Vector>& points, std::size_t k,
                                              DistanceMetric metric = DistanceMetric::Euclidean,
                                              KnnScoring scoring = KnnScoring::KthDistance) {
  return scores_from_neighbors(nearest_distances(points, k, metric), k, scoring);
}

/// 1-based ranks with ties sharing their average rank.
inline std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Midranks mapped onto [0, 1]; every value maps to 0.5 when n == 1.
inline std::vector<double> rank_normalize(const std::vector<double>& values) {
  auto r = midranks(values);
  const double span = static_cast<double>(values.size()) - 1.0;
  for (auto& v : r) v = span > 0.0 ? (v - 1.0) / span : 0.5;
  return r;
}

/// Probability that a random outlier outscores a random inlier, ties half.
inline double roc_auc(const std::vector<double>& scores, const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) throw InputDomainError("roc_auc: scores and labels differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw InputDomainError("roc_auc: NaN score");
  const auto ranks = midranks(scores);
  double outlier_rank_sum = 0.0;
  std::size_t n_out = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::Outlier) {
      outlier_rank_sum += ranks[i];
      ++n_out;
    }
  }
  const std::size_t n_in = labels.size() - n_out;
  if (n_out == 0 || n_in == 0) throw InputDomainError("roc_auc: labels must contain both inliers and outliers");
  const double no = static_cast<double>(n_out);
  const double u = outlier_rank_sum - no * (no + 1.0) / 2.0;
  return u / (no * static_cast<double>(n_in));
}

/// Labels of every instance; DataError when any is missing.
inline std::vector<Label> dataset_labels(const Dataset& ds) {
  std::vector<Label> labels;
  labels.reserve(ds.size());
  for (const auto& inst : ds.instances) {
    if (!inst.label) throw DataError("instance '" + inst.id + "' has no label");
    labels.push_back(*inst.label);
  }
  return labels;
}

struct OutlierReport {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<Label> labels;
  std::size_t k = 5;
  std::string metric = "euclidean";
  std::string method;
  double auc = 0.0;
};

inline OutlierReport make_report(const Dataset& ds, std::vector<double> scores, std::size_t k,
                                 const std::string& metric, const std::string& method) {
  if (scores.size() != ds.size()) throw InputDomainError("score count differs from instance count");
  OutlierReport rep;
  for (const auto& inst : ds.instances) rep.ids.push_back(inst.id);
  rep.labels = dataset_labels(ds);
  rep.scores = std::move(scores);
  rep.k = k;
  rep.metric = metric;
  rep.method = method;
  rep.auc = roc_auc(rep.scores, rep.labels);
  return rep;
}

inline Json to_json(const OutlierReport& r) {
  Json inst = Json::array();
  for (std::size_t i = 0; i < r.ids.size(); ++i)
    inst.push_back(Json{{"id", r.ids[i]}, {"score", r.scores[i]}, {"label", label_name(r.labels[i])}});
  return Json{{"method", r.method}, {"k", r.k}, {"metric", r.metric}, {"auc", r.auc}, {"instances", std::move(inst)}};
}

}  // namespace nas
