#pragma once

// Comparison methods: LEN, MCC, SEQ, ATR, EML, CSA, plus NAS itself behind
// the same output type.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nas/data.hpp"
#include "nas/error.hpp"
#include "nas/evaluation.hpp"
#include "nas/numeric.hpp"
#include "nas/training.hpp"

namespace nas {

enum class OutputKind { Embedding, Score };

struct BaselineOutput {
  std::string method;
  OutputKind kind = OutputKind::Embedding;
  std::vector<Vector> embeddings;  // kind == Embedding
  std::vector<double> scores;      // kind == Score

  std::size_t size() const { return kind == OutputKind::Embedding ? embeddings.size() : scores.size(); }
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"nas", "len", "mcc", "seq", "atr", "eml", "csa"};
  return names;
}

inline bool is_score_method(const std::string& m) { return m == "mcc" || m == "eml"; }

inline BaselineOutput baseline_len(const Dataset& ds) {
  BaselineOutput out{"len", OutputKind::Embedding, {}, {}};
  for (const auto& inst : ds.instances) out.embeddings.push_back(inst.attributes);
  return out;
}

/// First-order chain with add-one smoothing on both the initial
/// distribution and every transition row.
struct MarkovChain {
  Vector log_initial;
  Matrix log_transition;

  static MarkovChain fit(const Dataset& ds) {
    const auto r = static_cast<Eigen::Index>(ds.item_count());
    Vector init = Vector::Ones(r);
    Matrix trans = Matrix::Ones(r, r);
    for (const auto& inst : ds.instances) {
      init(static_cast<Eigen::Index>(inst.items.front())) += 1.0;
      for (std::size_t t = 1; t < inst.items.size(); ++t)
        trans(static_cast<Eigen::Index>(inst.items[t - 1]), static_cast<Eigen::Index>(inst.items[t])) += 1.0;
    }
    MarkovChain mc;
    mc.log_initial = (init / init.sum()).array().log().matrix();
    mc.log_transition = trans;
    for (Eigen::Index a = 0; a < r; ++a) {
      const double total = trans.row(a).sum();
      for (Eigen::Index b = 0; b < r; ++b) mc.log_transition(a, b) = std::log(trans(a, b) / total);
    }
    return mc;
  }

  /// Mean per-step log likelihood, the initial item counting as one step.
  double mean_log_likelihood(const std::vector<std::size_t>& items) const {
    if (items.empty()) throw InputDomainError("MarkovChain: empty sequence");
    double ll = log_initial(static_cast<Eigen::Index>(items.front()));
    for (std::size_t t = 1; t < items.size(); ++t)
      ll += log_transition(static_cast<Eigen::Index>(items[t - 1]), static_cast<Eigen::Index>(items[t]));
    return ll / static_cast<double>(items.size());
  }
};

inline BaselineOutput baseline_mcc(const Dataset& ds) {
  const auto mc = MarkovChain::fit(ds);
  BaselineOutput out{"mcc", OutputKind::Score, {}, {}};
  for (const auto& inst : ds.instances) out.scores.push_back(-mc.mean_log_likelihood(inst.items));
  return out;
}

/// Unconditioned sequence network; embedding = final cell state.
inline BaselineOutput baseline_seq(const Dataset& ds, TrainingConfig cfg) {
  cfg.conditioning = false;
  cfg.joint_loss = false;
  const auto model = train(ds, cfg);
  return {"seq", OutputKind::Embedding, embed_dataset(model, ds), {}};
}

/// Attribute network trained alone on the reconstruction loss; embedding =
/// code. Shares initialization and phase-1 shuffling with NAS, so the codes
/// equal the NAS phase-1 codes for one seed.
inline BaselineOutput baseline_atr(const Dataset& ds, const TrainingConfig& cfg) {
  ModelParams model = init_model(ds, cfg);
  train_attribute_phase(model, ds, cfg, cfg.attribute_epochs());
  BaselineOutput out{"atr", OutputKind::Embedding, {}, {}};
  for (const auto& inst : ds.instances) out.embeddings.push_back(attr_encode(model.attribute, inst.attributes));
  return out;
}

inline constexpr std::size_t kEmlNeighbors = 5;

/// Average of the rank-normalized MCC score and the rank-normalized LEN
/// k-NN score.
inline std::vector<double> rank_average(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InputDomainError("rank_average: component lengths differ");
  const auto ra = rank_normalize(a);
  const auto rb = rank_normalize(b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (ra[i] + rb[i]);
  return out;
}

inline BaselineOutput baseline_eml(const Dataset& ds, std::size_t k = kEmlNeighbors) {
  const auto mcc = baseline_mcc(ds).scores;
  const auto len = knn_outlier_scores(baseline_len(ds).embeddings, std::min(k, ds.size() - 1));
  return {"eml", OutputKind::Score, {}, rank_average(mcc, len)};
}

inline BaselineOutput baseline_csa(const Dataset& ds, const TrainingConfig& cfg) {
  const auto atr = baseline_atr(ds, cfg);
  const auto seq = baseline_seq(ds, cfg);
  BaselineOutput out{"csa", OutputKind::Embedding, {}, {}};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Vector v(atr.embeddings[i].size() + seq.embeddings[i].size());
    v << atr.embeddings[i], seq.embeddings[i];
    out.embeddings.push_back(std::move(v));
  }
  return out;
}

inline BaselineOutput method_nas(const Dataset& ds, const TrainingConfig& cfg) {
  const auto model = train(ds, cfg);
  return {"nas", OutputKind::Embedding, embed_dataset(model, ds), {}};
}

inline BaselineOutput run_method(const std::string& method, const Dataset& ds, const TrainingConfig& cfg) {
  if (method == "nas") return method_nas(ds, cfg);
  if (method == "len") return baseline_len(ds);
  if (method == "mcc") return baseline_mcc(ds);
  if (method == "seq") return baseline_seq(ds, cfg);
  if (method == "atr") return baseline_atr(ds, cfg);
  if (method == "eml") return baseline_eml(ds);
  if (method == "csa") return baseline_csa(ds, cfg);
  throw ConfigError("unknown method '" + method + "' (expected nas|len|mcc|seq|atr|eml|csa)");
}

/// Outlier scores of a method output: k-NN for embeddings, identity for
/// score-kind methods.
inline std::vector<double> outlier_scores(const BaselineOutput& out, std::size_t k,
                                          DistanceMetric metric = DistanceMetric::Euclidean,
                                          KnnScoring scoring = KnnScoring::KthDistance) {
  if (out.kind == OutputKind::Score) return out.scores;
  return knn_outlier_scores(out.embeddings, k, metric, scoring);
}

}  // namespace nas
