// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Separation experiment shared by criteria 4 and 5.
nas::SyntheticConfig separation_data(std::uint64_t seed) {
  nas::SyntheticConfig sc;
  sc.inliers = 5000;
  sc.outliers = 100;
  sc.dependency = 0.9;
  sc.regime_numerical = 2;
  sc.seed = seed;
  return sc;
}

nas::TrainingConfig default_training(std::uint64_t seed) {
  nas::TrainingConfig tc;  // d = 15, 10 epochs, lr 0.01, batch 32
  tc.seed = seed;
  return tc;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0, models = 0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    nas::SyntheticConfig sc;
    sc.inliers = 12;
    sc.outliers = 1;
    sc.items = 6;
    sc.noise_categorical = 1;
    sc.noise_levels = 3;
    sc.noise_numerical = 1;
    sc.min_length = 1;
    sc.max_length = 10;
    sc.seed = seed;
    const auto ds = nas::generate_synthetic(sc).dataset;  // u = 6, r = 6
    for (auto gate : {nas::CandidateGate::Sigmoid, nas::CandidateGate::Tanh}) {
      for (std::size_t depth : {1u, 2u}) {
        for (std::size_t d : {3u, 6u}) {
          nas::TrainingConfig tc;
          tc.hidden = d;
          tc.depth = depth;
          tc.candidate = gate;
          tc.epochs = 2;
          tc.batch_size = 4;
          tc.learning_rate = 0.1;
          tc.seed = seed * 10 + d;
          const auto model = nas::train(ds, tc);  // trained a little so biases are non-zero
          ++models;
          for (std::size_t i = 0; i < ds.size(); i += 4) {
            const auto rep = nas::gradient_check(model, ds.instances[i], 1e-4);
            checked += rep.checked;
            ok = ok && rep.passed;
            if (rep.max_relative_error >= worst) {
              worst = rep.max_relative_error;
              where = rep.worst_parameter;
            }
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 10.0, std::to_string(models) + " models, " + std::to_string(checked) +
                                 " parameter checks, max relative error " + fmt("%.3g", worst) + " (" + where +
                                 "), " + fmt("%.2f", secs) + " s"};
}

Outcome oracle_equivalence() {
  nas::RandomSource rng(2024);
  bool ok = true;
  std::size_t knn_cases = 0, auc_cases = 0, fwd_cases = 0;
  double fwd_err = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng.below(99), dim = 1 + rng.below(8), k = 1 + rng.below(n - 1);
    std::vector<nas::Vector> pts;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      nas::Vector v(static_cast<Eigen::Index>(dim));
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = trial % 3 == 0 ? static_cast<double>(rng.below(3)) : rng.normal();
      pts.push_back(v);
      rows.push_back(oracle::to_vec(v));
    }
    ok = ok && nas::knn_outlier_scores(pts, k) == oracle::knn(rows, k);
    ++knn_cases;
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<nas::Label> labels(n, nas::Label::Inlier);
    const std::size_t outl = 1 + rng.below(n - 1);
    for (std::size_t i = 0; i < outl; ++i) labels[i] = nas::Label::Outlier;
    rng.shuffle(labels);
    std::vector<double> s(n);
    for (auto& v : s) v = trial % 2 ? static_cast<double>(rng.below(6)) : rng.normal();
    ok = ok && nas::roc_auc(s, labels) == oracle::auc(s, labels);
    ++auc_cases;
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    nas::RandomSource r2(seed);
    const std::size_t items = 2 + r2.below(5), d = 1 + r2.below(6);
    auto p = nas::make_sequence_net(items, d, seed % 2 ? nas::CandidateGate::Tanh : nas::CandidateGate::Sigmoid, r2);
    nas::for_each_block(p, [&](const std::string&, auto& blk) {
      for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] += r2.uniform(-0.3, 0.3);
    });
    std::vector<std::size_t> seq(1 + r2.below(10));
    for (auto& it : seq) it = r2.below(items);
    nas::Vector code(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < code.size(); ++i) code(i) = r2.uniform();
    const auto cv = oracle::to_vec(code);
    for (bool cond : {false, true}) {
      const auto lib = cond ? nas::seq_forward(p, code, seq) : nas::seq_forward(p, nullptr, seq);
      const auto ref = oracle::lstm_forward(p, cond ? &cv : nullptr, seq);
      fwd_err = std::max(fwd_err, std::abs(lib.loss - ref.loss));
      for (std::size_t t = 0; t < seq.size(); ++t) {
        for (std::size_t j = 0; j < items; ++j)
          fwd_err = std::max(fwd_err, std::abs(lib.trace.predictions[t](static_cast<Eigen::Index>(j)) - ref.predictions[t][j]));
        fwd_err = std::max(fwd_err, std::abs(lib.trace.step_losses[t] + std::log(ref.predictions[t][seq[t]])));
        const auto oh = nas::one_hot(seq[t], items);
        for (std::size_t j = 0; j < items; ++j) ok = ok && oh(static_cast<Eigen::Index>(j)) == (j == seq[t] ? 1.0 : 0.0);
      }
      ++fwd_cases;
    }
  }
  ok = ok && fwd_err <= 1e-12;
  return {ok, std::to_string(knn_cases) + " k-NN clouds exact, " + std::to_string(auc_cases) + " AUC cases exact, " +
                  std::to_string(fwd_cases) + " softmax/loss re-evaluations, max deviation " + fmt("%.2g", fwd_err)};
}

Outcome learnability() {
  const auto t0 = Clock::now();
  const auto ds = nas::generate_branching({});
  auto tc = default_training(1);
  const auto model = nas::train(ds, tc);
  tc.conditioning = false;
  const auto seq = nas::train(ds, tc);
  const double a_nas = nas::next_item_accuracy(model, ds), a_seq = nas::next_item_accuracy(seq, ds);
  const double secs = seconds_since(t0);
  return {a_nas >= 0.95 && a_seq <= 0.60 && secs < 120.0,
          "NAS accuracy " + fmt("%.4f", a_nas) + ", SEQ accuracy " + fmt("%.4f", a_seq) + " on " +
              std::to_string(ds.size()) + " instances, " + fmt("%.1f", secs) + " s"};
}

Outcome dependency_separation() {
  double mean[4] = {0, 0, 0, 0};
  bool ordering = true;
  std::string per_seed;
  const char* names[4] = {"nas", "seq", "atr", "csa"};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ds = nas::generate_synthetic(separation_data(seed)).dataset;
    const auto labels = nas::dataset_labels(ds);
    double auc[4];
    for (int m = 0; m < 4; ++m) {
      auc[m] = nas::roc_auc(nas::outlier_scores(nas::run_method(names[m], ds, default_training(seed)), 5), labels);
      mean[m] += auc[m] / 5.0;
    }
    ordering = ordering && auc[0] > std::max({auc[1], auc[2], auc[3]});
    per_seed += (seed > 1 ? " " : "") + fmt("%.3f", auc[0]) + "/" + fmt("%.3f", std::max({auc[1], auc[2], auc[3]}));
  }
  const double margin = mean[0] - std::max({mean[1], mean[2], mean[3]});
  const bool ok = ordering && margin >= 0.15 && mean[0] >= 0.85;
  return {ok, "mean AUC nas " + fmt("%.3f", mean[0]) + " seq " + fmt("%.3f", mean[1]) + " atr " + fmt("%.3f", mean[2]) +
                  " csa " + fmt("%.3f", mean[3]) + ", margin " + fmt("%+.3f", margin) +
                  ", per-seed nas/best-other " + per_seed};
}

Outcome sweep_robustness() {
  const auto ds = nas::generate_synthetic(separation_data(1)).dataset;
  nas::SweepConfig sc;
  sc.methods = {"nas", "len", "seq", "atr", "csa"};
  sc.ks = {5, 10, 15, 20, 25};
  sc.dims = {15};
  sc.epochs = {10, 20};
  sc.base = default_training(1);
  const auto res = nas::run_sweep(ds, sc);
  std::size_t wins = 0;
  std::string worst_k;
  double worst_gap = 1.0;
  for (auto k : sc.ks) {
    double best_other = 0.0;
    for (const auto& m : sc.methods)
      if (m != "nas") best_other = std::max(best_other, res.auc(m, k, 15, 10));
    const double gap = res.auc("nas", k, 15, 10) - best_other;
    wins += gap > 0.0;
    if (gap < worst_gap) {
      worst_gap = gap;
      worst_k = std::to_string(k);
    }
  }
  const double e10 = res.auc("nas", 5, 15, 10), e20 = res.auc("nas", 5, 15, 20);
  const bool stable = e20 >= e10 - 0.05;
  return {wins == sc.ks.size() && stable,
          "NAS best at " + std::to_string(wins) + "/5 k values (worst gap " + fmt("%+.3f", worst_gap) + " at k=" +
              worst_k + "), NAS AUC epoch 10 " + fmt("%.3f", e10) + " -> epoch 20 " + fmt("%.3f", e20)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("NAS_LOG=quiet ") + NAS_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism_persistence() {
  std::vector<std::string> files{"data.jsonl", "data.jsonl.manifest.json", "model.json", "model.json.loss.csv",
                                 "emb.txt", "report.json", "scores.txt"};
  std::vector<std::string> dirs;
  bool ran = true;
  for (int run = 0; run < 2; ++run) {
    const std::string dir = testutil::tmp_path("acceptance_run" + std::to_string(run));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    dirs.push_back(dir);
    ran = ran && run_cli("synth --out " + dir + "/data.jsonl --seed 21") == 0;
    ran = ran && run_cli("train --data " + dir + "/data.jsonl --model " + dir + "/model.json --seed 21") == 0;
    ran = ran && run_cli("embed --data " + dir + "/data.jsonl --model " + dir + "/model.json --out " + dir + "/emb.txt") == 0;
    ran = ran && run_cli("detect --data " + dir + "/data.jsonl --embeddings " + dir + "/emb.txt --out " + dir +
                         "/report.json --scores-out " + dir + "/scores.txt") == 0;
  }
  std::size_t identical = 0;
  for (const auto& f : files) {
    const auto a = slurp(dirs[0] + "/" + f);
    identical += !a.empty() && a == slurp(dirs[1] + "/" + f);
  }
  // Round trip: reloaded model reproduces every embedding bit.
  const auto ds = nas::load_jsonl(dirs[0] + "/data.jsonl");
  const auto model = nas::train(ds, default_training(21));
  const auto path = testutil::tmp_path("acceptance_roundtrip.json");
  nas::save_model(model, path);
  const auto back = nas::load_model(path);
  std::size_t same = 0;
  const auto e1 = nas::embed_dataset(model, ds), e2 = nas::embed_dataset(back, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) same += testutil::bitwise_equal(e1[i], e2[i]);
  const bool ok = ran && identical == files.size() && same == ds.size();
  return {ok, std::to_string(identical) + "/" + std::to_string(files.size()) +
                  " pipeline outputs byte-identical across runs, " + std::to_string(same) + "/" +
                  std::to_string(ds.size()) + " embeddings unchanged after save/load"};
}

Outcome invariant_suites() {
  std::vector<std::string> failed;
  auto expect = [&](bool cond, const std::string& name) {
    if (!cond) failed.push_back(name);
  };
  auto ds = testutil::tiny_dataset(5, 60, 3);

  // Normalization: encoded attributes, softmax outputs, rank normalization.
  bool in_unit = true;
  for (const auto& inst : ds.instances) in_unit = in_unit && inst.attributes.minCoeff() >= 0.0 && inst.attributes.maxCoeff() <= 1.0;
  expect(in_unit, "attribute encoding in [0,1]");
  {
    nas::RandomSource rng(3);
    bool sums = true;
    for (int t = 0; t < 50; ++t) {
      nas::Vector z(7);
      for (Eigen::Index i = 0; i < 7; ++i) z(i) = rng.uniform(-50, 50);
      const auto y = nas::softmax(z);
      sums = sums && std::abs(y.sum() - 1.0) < 1e-12 && y.minCoeff() >= 0.0;
    }
    expect(sums, "softmax on the simplex");
    std::vector<double> v(40);
    for (auto& x : v) x = rng.normal();
    const auto rn = nas::rank_normalize(v);
    expect(*std::min_element(rn.begin(), rn.end()) == 0.0 && *std::max_element(rn.begin(), rn.end()) == 1.0,
           "rank normalization spans [0,1]");
  }

  // Rigid-motion invariance of k-NN scores.
  {
    nas::RandomSource rng(8);
    const auto emb = nas::baseline_len(ds).embeddings;
    const nas::Matrix q = nas::orthogonal_init(static_cast<std::size_t>(emb[0].size()), rng);
    nas::Vector shift(emb[0].size());
    for (Eigen::Index i = 0; i < shift.size(); ++i) shift(i) = rng.uniform(-5, 5);
    std::vector<nas::Vector> moved;
    for (const auto& e : emb) moved.push_back(q * e + shift);
    const auto a = nas::knn_outlier_scores(emb, 5), b = nas::knn_outlier_scores(moved, 5);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
    expect(dev < 1e-9, "k-NN rigid-motion invariance");
  }

  // Monotone-transform invariance of AUC.
  {
    const auto labels = nas::dataset_labels(ds);
    const auto s = nas::baseline_mcc(ds).scores;
    std::vector<double> e(s), c(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      e[i] = std::exp(s[i]);
      c[i] = 2.0 * s[i] * s[i] * s[i] - 1.0;
    }
    const double ref = nas::roc_auc(s, labels);
    expect(nas::roc_auc(e, labels) == ref && nas::roc_auc(c, labels) == ref, "AUC monotone-transform invariance");
  }

  // Label-blindness of every training path.
  {
    auto stripped = ds, flipped = ds;
    for (auto& inst : stripped.instances) inst.label.reset();
    for (auto& inst : flipped.instances)
      inst.label = inst.label == nas::Label::Outlier ? nas::Label::Inlier : nas::Label::Outlier;
    auto tc = testutil::tiny_config();
    for (bool joint : {false, true}) {
      tc.joint_loss = joint;
      const auto ref = nas::train(ds, tc);
      expect(testutil::same_params(ref, nas::train(stripped, tc)) && testutil::same_params(ref, nas::train(flipped, tc)),
             joint ? "label-blind joint training" : "label-blind two-phase training");
    }
    tc.joint_loss = false;
    for (const auto& m : nas::method_names()) {
      const auto a = nas::run_method(m, ds, tc), b = nas::run_method(m, stripped, tc), c = nas::run_method(m, flipped, tc);
      bool same = a.scores == b.scores && a.scores == c.scores && a.embeddings.size() == b.embeddings.size();
      for (std::size_t i = 0; same && i < a.embeddings.size(); ++i)
        same = testutil::bitwise_equal(a.embeddings[i], b.embeddings[i]) && testutil::bitwise_equal(a.embeddings[i], c.embeddings[i]);
      expect(same, "label-blind " + m);
    }
  }

  // Orthogonal recurrent init and zero biases.
  {
    const auto m = nas::init_model(ds, testutil::tiny_config(5));
    bool ok = true;
    nas::for_each_block(m.sequence, [&](const std::string& name, const auto& blk) {
      if (name[0] == 'U') {
        const nas::Matrix u = blk;
        ok = ok && (u.transpose() * u - nas::Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff() < 1e-6;
      }
      if (name[0] == 'b') ok = ok && blk.squaredNorm() == 0.0;
    });
    expect(ok, "orthogonal recurrent init with zero biases");
  }

  std::string detail = failed.empty() ? "all invariant checks hold" : "violated:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"oracle equivalence", oracle_equivalence},
      {"learnability", learnability},
      {"dependency separation", dependency_separation},
      {"sweep robustness", sweep_robustness},
      {"determinism and persistence", determinism_persistence},
      {"invariant suites", invariant_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu: %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
