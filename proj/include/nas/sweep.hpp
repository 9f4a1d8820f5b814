#pragma once

// Grid runner over (method, k, d, epochs) reporting ROC AUC per cell.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "nas/baselines.hpp"
#include "nas/evaluation.hpp"
#include "nas/training.hpp"

namespace nas {

struct SweepConfig {
  std::vector<std::string> methods{"nas", "seq", "atr", "csa"};
  std::vector<std::size_t> ks{5};
  std::vector<std::size_t> dims{15};
  std::vector<std::size_t> epochs{10};
  TrainingConfig base;  // seed and the remaining training knobs
  DistanceMetric metric = DistanceMetric::Euclidean;
  KnnScoring scoring = KnnScoring::KthDistance;

  void validate() const {
    if (methods.empty() || ks.empty() || dims.empty() || epochs.empty())
      throw ConfigError("sweep: every grid must be non-empty");
    for (const auto& m : methods) {
      bool known = false;
      for (const auto& n : method_names()) known = known || n == m;
      if (!known) throw ConfigError("sweep: unknown method '" + m + "'");
    }
    base.validate();
  }
};

struct SweepRow {
  std::string method;
  std::size_t k = 0;
  std::size_t d = 0;
  std::size_t epochs = 0;
  double auc = 0.0;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  /// AUC of one cell; throws when absent.
  double auc(const std::string& method, std::size_t k, std::size_t d, std::size_t epochs) const {
    for (const auto& r : rows)
      if (r.method == method && r.k == k && r.d == d && r.epochs == epochs) return r.auc;
    throw InputDomainError("sweep: no cell for " + method);
  }
};

inline void write_sweep_header(std::ostream& out) { out << "method,k,d,epochs,auc,wall_seconds\n"; }

inline void write_sweep_row(std::ostream& out, const SweepRow& r) {
  char auc[64], wall[64];
  std::snprintf(auc, sizeof auc, "%.17g", r.auc);
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_seconds);
  out << r.method << ',' << r.k << ',' << r.d << ',' << r.epochs << ',' << auc << ',' << wall << '\n';
}

/// Runs every cell. Score-kind methods are fitted once and their AUC is
/// replicated across the k and d axes. `sink` sees each row as soon as it
/// is complete.
inline SweepResult run_sweep(const Dataset& ds, const SweepConfig& cfg,
                             const std::function<void(const SweepRow&)>& sink = {}) {
  cfg.validate();
  const auto labels = dataset_labels(ds);
  SweepResult result;
  std::map<std::string, std::pair<double, double>> score_cache;  // method -> (auc, seconds)
  std::size_t kmax = 0;
  for (auto k : cfg.ks) kmax = std::max(kmax, k);

  auto emit = [&](SweepRow row) {
    if (sink) sink(row);
    result.rows.push_back(std::move(row));
  };

  for (auto d : cfg.dims) {
    for (auto ep : cfg.epochs) {
      TrainingConfig tc = cfg.base;
      tc.hidden = d;
      tc.epochs = ep;
      for (const auto& method : cfg.methods) {
        using Clock = std::chrono::steady_clock;
        if (is_score_method(method)) {
          auto it = score_cache.find(method);
          if (it == score_cache.end()) {
            const auto t0 = Clock::now();
            const auto out = run_method(method, ds, tc);
            const double auc = roc_auc(out.scores, labels);
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            it = score_cache.emplace(method, std::make_pair(auc, secs)).first;
          }
          for (auto k : cfg.ks) emit({method, k, d, ep, it->second.first, it->second.second});
          continue;
        }
        const auto t0 = Clock::now();
        const auto out = run_method(method, ds, tc);
        const auto neighbors = nearest_distances(out.embeddings, kmax, cfg.metric);
        const double fit_secs = std::chrono::duration<double>(Clock::now() - t0).count();
        for (auto k : cfg.ks) {
          const auto t1 = Clock::now();
          const double auc = roc_auc(scores_from_neighbors(neighbors, k, cfg.scoring), labels);
          const double secs = fit_secs + std::chrono::duration<double>(Clock::now() - t1).count();
          emit({method, k, d, ep, auc, secs});
        }
      }
    }
  }
  return result;
}

}  // namespace nas
