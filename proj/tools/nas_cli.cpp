// nas: command-line front end (synth, train, embed, detect, sweep, gradcheck).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nas/nas.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("NAS_LOG");
  if (!env) return LogLevel::Info;
  const std::string v = env;
  if (v == "quiet" || v == "0") return LogLevel::Quiet;
  if (v == "debug" || v == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) std::cerr << msg << '\n';
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::string config_hash(const nas::Json& cfg) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Provenance {
  std::string command;
  std::string hash;
  std::uint64_t seed = 0;

  std::string header() const {
    return "# nas " + std::string(nas::kVersion) + " command=" + command + " config=" + hash +
           " seed=" + std::to_string(seed);
  }

  nas::Json json() const {
    return nas::Json{{"tool", "nas"}, {"version", nas::kVersion}, {"command", command}, {"config_hash", hash}, {"seed", seed}};
  }
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw nas::ConfigError(what + " path is required");
  if (!std::filesystem::is_regular_file(path)) throw nas::DataError(what + " '" + path + "' does not exist");
}

void require_output(const std::string& path, const std::string& what) {
  if (path.empty()) throw nas::ConfigError(what + " path is required");
  const auto parent = std::filesystem::absolute(path).parent_path();
  if (!std::filesystem::is_directory(parent))
    throw nas::ConfigError(what + " directory '" + parent.string() + "' does not exist");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw nas::DataError("cannot open '" + path + "' for writing");
  return out;
}

// ---------------------------------------------------------------------------
// Training flags shared by train, embed, sweep and gradcheck
// ---------------------------------------------------------------------------

struct TrainFlags {
  std::uint64_t seed = 1;
  std::size_t d = 15;
  std::size_t epochs = 10;
  std::size_t pretrain_epochs = 0;
  double lr = 0.01;
  std::size_t batch = 32;
  std::size_t depth = 1;
  bool no_condition = false;
  bool no_encoder_update = false;
  bool joint_loss = false;
  std::string g_gate = "tanh";
  double clip = 0.0;
  std::size_t max_length = 0;

  void add(CLI::App* app, bool with_d_epochs = true) {
    if (with_d_epochs) {
      app->add_option("--d", d, "embedding / hidden width d")->capture_default_str();
      app->add_option("--epochs", epochs, "sequence-phase epochs")->capture_default_str();
    }
    app->add_option("--pretrain-epochs", pretrain_epochs, "attribute-phase epochs (0 = same as --epochs)");
    app->add_option("--lr", lr, "SGD learning rate")->capture_default_str();
    app->add_option("--batch", batch, "mini-batch size")->capture_default_str();
    app->add_option("--depth", depth, "attribute encoder depth M")->capture_default_str();
    app->add_flag("--no-condition", no_condition, "train without attribute conditioning (SEQ variant)");
    app->add_flag("--no-encoder-update", no_encoder_update, "freeze the encoder during the sequence phase");
    app->add_flag("--joint-loss", joint_loss, "minimize L_A + L_S jointly instead of in two phases");
    app->add_option("--g-gate", g_gate, "candidate gate activation")
        ->check(CLI::IsMember({"sigmoid", "tanh"}))
        ->capture_default_str();
    app->add_option("--clip", clip, "per-batch gradient L2 clip (0 = off)");
    app->add_option("--max-length", max_length, "truncate sequences to this many items (0 = keep all)");
  }

  nas::TrainingConfig config() const {
    nas::TrainingConfig c;
    c.learning_rate = lr;
    c.epochs = epochs;
    if (pretrain_epochs > 0) c.pretrain_epochs = pretrain_epochs;
    c.batch_size = batch;
    c.hidden = d;
    c.depth = depth;
    c.conditioning = !no_condition;
    c.joint_encoder_update = !no_encoder_update;
    c.joint_loss = joint_loss;
    c.candidate = nas::candidate_gate_from_name(g_gate);
    c.clip_norm = clip;
    c.seed = seed;
    c.validate();
    if (lr == 0.0) warn("learning rate is 0; parameters will stay at their initialization");
    return c;
  }
};

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthCmd {
  std::string out;
  std::string generator = "crossed";
  nas::SyntheticConfig crossed;
  nas::BranchingConfig branching;

  void add(CLI::App* app) {
    app->add_option("--out", out, "output JSONL path")->required();
    app->add_option("--seed", crossed.seed, "generator seed")->required();
    app->add_option("--generator", generator, "dataset family")->check(CLI::IsMember({"crossed", "branching"}));
    app->add_option("--inliers", crossed.inliers)->capture_default_str();
    app->add_option("--outliers", crossed.outliers)->capture_default_str();
    app->add_option("--regimes", crossed.regimes)->capture_default_str();
    app->add_option("--items", crossed.items)->capture_default_str();
    app->add_option("--min-length", crossed.min_length)->capture_default_str();
    app->add_option("--max-length", crossed.max_length)->capture_default_str();
    app->add_option("--dependency", crossed.dependency)->capture_default_str();
    app->add_option("--noise-categorical", crossed.noise_categorical)->capture_default_str();
    app->add_option("--noise-levels", crossed.noise_levels)->capture_default_str();
    app->add_option("--noise-numerical", crossed.noise_numerical)->capture_default_str();
    app->add_option("--regime-numerical", crossed.regime_numerical)->capture_default_str();
    app->add_option("--regime-spread", crossed.regime_spread)->capture_default_str();
    app->add_option("--instances", branching.instances, "branching: instance count")->capture_default_str();
    app->add_option("--depth", branching.depth, "branching: number of branch points")->capture_default_str();
    app->add_option("--branches", branching.branches, "branching: choices per branch point")->capture_default_str();
  }

  int run() {
    require_output(out, "dataset");
    nas::Dataset ds;
    nas::Json params;
    if (generator == "crossed") {
      ds = nas::generate_synthetic(crossed).dataset;
      params = nas::to_json(crossed);
    } else {
      branching.seed = crossed.seed;
      branching.min_length = std::min(branching.min_length, branching.depth);
      ds = nas::generate_branching(branching);
      params = nas::Json{{"instances", branching.instances}, {"depth", branching.depth},
                         {"branches", branching.branches}, {"min_length", branching.min_length},
                         {"seed", branching.seed}};
    }
    const nas::Json cfg{{"generator", generator}, {"params", params}};
    const Provenance prov{"synth", config_hash(cfg), crossed.seed};
    nas::save_jsonl(ds, out);
    std::size_t outliers = 0;
    for (const auto& inst : ds.instances) outliers += inst.label == nas::Label::Outlier;
    nas::Json manifest = prov.json();
    manifest["generator"] = generator;
    manifest["params"] = params;
    manifest["instances"] = ds.size();
    manifest["outliers"] = outliers;
    manifest["dataset"] = std::filesystem::path(out).filename().string();
    auto mf = open_output(out + ".manifest.json");
    mf << manifest.dump(2) << '\n';
    log(LogLevel::Info, "wrote " + std::to_string(ds.size()) + " instances to " + out);
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCmd {
  std::string data, model, loss_csv;
  TrainFlags flags;

  void add(CLI::App* app) {
    app->add_option("--data", data, "training JSONL")->required();
    app->add_option("--model", model, "model output path")->required();
    app->add_option("--loss-csv", loss_csv, "loss history CSV (default: <model>.loss.csv)");
    app->add_option("--seed", flags.seed, "initialization / shuffling seed")->required();
    flags.add(app);
  }

  int run() {
    require_input(data, "dataset");
    require_output(model, "model");
    if (loss_csv.empty()) loss_csv = model + ".loss.csv";
    require_output(loss_csv, "loss CSV");
    const auto cfg = flags.config();
    nas::LoadOptions opts;
    opts.max_length = flags.max_length;
    const auto ds = nas::load_jsonl(data, opts);
    log(LogLevel::Info, "training on " + std::to_string(ds.size()) + " instances (u=" +
                            std::to_string(ds.attribute_width()) + ", r=" + std::to_string(ds.item_count()) + ")");
    const auto params = nas::train(ds, cfg);
    for (const auto& h : params.history)
      log(LogLevel::Debug, h.phase + " epoch " + std::to_string(h.epoch) + " mean loss " + fmt_double(h.mean_loss));
    const Provenance prov{"train", config_hash(nas::to_json(cfg)), cfg.seed};
    nas::Json doc = nas::model_to_json(params);
    doc["provenance"] = prov.json();
    {
      auto out = open_output(model);
      out << doc.dump() << '\n';
    }
    auto csv = open_output(loss_csv);
    csv << prov.header() << '\n';
    nas::write_loss_csv(params.history, csv);
    log(LogLevel::Info, "model written to " + model);
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

void write_embeddings(const std::string& path, const Provenance& prov, const nas::Dataset& ds,
                      const std::vector<nas::Vector>& emb) {
  auto out = open_output(path);
  out << prov.header() << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.instances[i].id;
    for (Eigen::Index j = 0; j < emb[i].size(); ++j) out << ' ' << fmt_double(emb[i](j));
    out << '\n';
  }
}

void write_scores(const std::string& path, const Provenance& prov, const std::vector<std::string>& ids,
                  const std::vector<double>& scores) {
  auto out = open_output(path);
  out << prov.header() << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ' ' << fmt_double(scores[i]) << '\n';
}

struct EmbedCmd {
  std::string data, model, out, method = "nas", unknown_levels = "zero";
  TrainFlags flags;

  void add(CLI::App* app) {
    app->add_option("--data", data, "dataset JSONL")->required();
    app->add_option("--model", model, "trained model (method nas)");
    app->add_option("--out", out, "embeddings (or scores) output path")->required();
    app->add_option("--method", method, "nas|len|mcc|seq|atr|eml|csa")
        ->check(CLI::IsMember(nas::method_names()))
        ->capture_default_str();
    app->add_option("--unknown-levels", unknown_levels, "unseen categorical levels: zero|reject")
        ->check(CLI::IsMember({"zero", "reject"}));
    app->add_option("--seed", flags.seed, "seed for baselines that train");
    flags.add(app);
  }

  int run() {
    require_input(data, "dataset");
    require_output(out, "output");
    nas::LoadOptions opts;
    opts.max_length = flags.max_length;
    opts.unknown_levels = unknown_levels == "reject" ? nas::UnknownLevelPolicy::Reject : nas::UnknownLevelPolicy::ZeroBlock;
    if (method == "nas") {
      require_input(model, "model");
      const auto params = nas::load_model(model);
      const auto ds = nas::load_jsonl(data, params.vocabulary, params.schema, opts);
      const Provenance prov{"embed", config_hash(nas::to_json(params.config)), params.config.seed};
      write_embeddings(out, prov, ds, nas::embed_dataset(params, ds));
      log(LogLevel::Info, "embedded " + std::to_string(ds.size()) + " instances");
      return kExitOk;
    }
    const auto cfg = flags.config();
    const auto ds = nas::load_jsonl(data, opts);
    nas::Json cj = nas::to_json(cfg);
    cj["method"] = method;
    const Provenance prov{"embed", config_hash(cj), cfg.seed};
    const auto result = nas::run_method(method, ds, cfg);
    if (result.kind == nas::OutputKind::Embedding) {
      write_embeddings(out, prov, ds, result.embeddings);
    } else {
      std::vector<std::string> ids;
      for (const auto& inst : ds.instances) ids.push_back(inst.id);
      write_scores(out, prov, ids, result.scores);
    }
    log(LogLevel::Info, method + ": wrote " + std::to_string(ds.size()) + " rows");
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct ParsedTable {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::uint64_t seed = 0;
};

ParsedTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nas::DataError("cannot open '" + path + "'");
  ParsedTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find(" seed=");
      if (pos != std::string::npos) t.seed = std::stoull(line.substr(pos + 6));
      continue;
    }
    std::istringstream ss(line);
    std::string id;
    ss >> id;
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw nas::DataError("'" + path + "' line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
    }
    if (row.empty()) throw nas::DataError("'" + path + "' line " + std::to_string(line_no) + ": no values");
    if (!t.rows.empty() && row.size() != t.rows.front().size())
      throw nas::DataError("'" + path + "' line " + std::to_string(line_no) + ": inconsistent column count");
    t.ids.push_back(id);
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct DetectCmd {
  std::string data, embeddings, scores, out, scores_out, metric = "euclidean", scoring = "kth";
  std::size_t k = 5;

  void add(CLI::App* app) {
    app->add_option("--data", data, "dataset JSONL carrying labels")->required();
    auto* e = app->add_option("--embeddings", embeddings, "embeddings file");
    auto* s = app->add_option("--scores", scores, "precomputed score file (MCC/EML)");
    e->excludes(s);
    app->add_option("--out", out, "report JSON path")->required();
    app->add_option("--scores-out", scores_out, "also write per-instance k-NN scores");
    app->add_option("--k", k, "neighbor rank")->capture_default_str();
    app->add_option("--metric", metric)->check(CLI::IsMember({"euclidean", "cosine"}))->capture_default_str();
    app->add_option("--scoring", scoring, "kth|mean")->check(CLI::IsMember({"kth", "mean"}))->capture_default_str();
  }

  int run() {
    require_input(data, "dataset");
    require_output(out, "report");
    if (embeddings.empty() == scores.empty()) throw nas::ConfigError("give exactly one of --embeddings or --scores");
    const std::string input = embeddings.empty() ? scores : embeddings;
    require_input(input, "input");
    const auto ds = nas::load_jsonl(data);
    const auto table = read_table(input);
    if (table.ids.size() != ds.size())
      throw nas::DataError("input has " + std::to_string(table.ids.size()) + " rows but the dataset has " +
                           std::to_string(ds.size()) + " instances");
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (table.ids[i] != ds.instances[i].id)
        throw nas::DataError("row " + std::to_string(i + 1) + " id '" + table.ids[i] + "' does not match dataset id '" +
                             ds.instances[i].id + "'");
    std::vector<double> values;
    if (!scores.empty()) {
      if (table.rows.front().size() != 1) throw nas::DataError("score file must have one value per row");
      for (const auto& r : table.rows) values.push_back(r[0]);
    } else {
      std::vector<nas::Vector> pts;
      for (const auto& r : table.rows) pts.push_back(Eigen::Map<const nas::Vector>(r.data(), static_cast<Eigen::Index>(r.size())));
      values = nas::knn_outlier_scores(pts, k, nas::metric_from_name(metric), nas::scoring_from_name(scoring));
    }
    const auto report = nas::make_report(ds, values, k, metric, scores.empty() ? "embedding" : "score");
    const nas::Json cfg{{"k", k}, {"metric", metric}, {"scoring", scoring}, {"input", scores.empty() ? "embeddings" : "scores"}};
    const Provenance prov{"detect", config_hash(cfg), table.seed};
    nas::Json doc = nas::to_json(report);
    doc["scoring"] = scoring;
    doc["provenance"] = prov.json();
    {
      auto o = open_output(out);
      o << doc.dump(2) << '\n';
    }
    if (!scores_out.empty()) write_scores(scores_out, prov, report.ids, report.scores);
    std::cout << "auc " << fmt_double(report.auc) << '\n';
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepCmd {
  std::string data, out, metric = "euclidean", scoring = "kth";
  std::vector<std::string> methods{"nas", "seq", "atr", "csa"};
  std::vector<std::size_t> ks{5}, dims{15}, epochs{10};
  TrainFlags flags;

  void add(CLI::App* app) {
    app->add_option("--data", data, "labeled dataset JSONL")->required();
    app->add_option("--out", out, "sweep CSV path")->required();
    app->add_option("--seed", flags.seed, "seed shared by every cell")->required();
    app->add_option("--method", methods, "methods (comma separated)")->delimiter(',')->check(CLI::IsMember(nas::method_names()));
    app->add_option("--k", ks, "k grid (comma separated)")->delimiter(',');
    app->add_option("--d", dims, "d grid (comma separated)")->delimiter(',');
    app->add_option("--epochs", epochs, "epoch grid (comma separated)")->delimiter(',');
    app->add_option("--metric", metric)->check(CLI::IsMember({"euclidean", "cosine"}));
    app->add_option("--scoring", scoring)->check(CLI::IsMember({"kth", "mean"}));
    flags.add(app, false);
  }

  int run() {
    require_input(data, "dataset");
    require_output(out, "sweep CSV");
    nas::SweepConfig sc;
    sc.methods = methods;
    sc.ks = ks;
    sc.dims = dims;
    sc.epochs = epochs;
    sc.base = flags.config();
    sc.metric = nas::metric_from_name(metric);
    sc.scoring = nas::scoring_from_name(scoring);
    sc.validate();
    nas::LoadOptions opts;
    opts.max_length = flags.max_length;
    const auto ds = nas::load_jsonl(data, opts);
    nas::Json cj = nas::to_json(sc.base);
    cj["methods"] = methods;
    cj["ks"] = ks;
    cj["dims"] = dims;
    cj["epochs_grid"] = epochs;
    cj["metric"] = metric;
    cj["scoring"] = scoring;
    const Provenance prov{"sweep", config_hash(cj), sc.base.seed};
    auto csv = open_output(out);
    csv << prov.header() << '\n';
    nas::write_sweep_header(csv);
    csv.flush();
    nas::run_sweep(ds, sc, [&](const nas::SweepRow& row) {
      nas::write_sweep_row(csv, row);
      csv.flush();
      log(LogLevel::Info, row.method + " k=" + std::to_string(row.k) + " d=" + std::to_string(row.d) +
                              " epochs=" + std::to_string(row.epochs) + " auc=" + fmt_double(row.auc));
    });
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

struct GradcheckCmd {
  std::string data;
  std::size_t instance = 0;
  double tolerance = 1e-4;
  TrainFlags flags;

  void add(CLI::App* app) {
    flags.d = 4;
    app->add_option("--data", data, "dataset JSONL (default: a tiny synthetic set)");
    app->add_option("--instance", instance, "instance index to check")->capture_default_str();
    app->add_option("--tolerance", tolerance, "maximum relative error")->capture_default_str();
    app->add_option("--seed", flags.seed, "initialization seed")->capture_default_str();
    flags.add(app);
  }

  int run() {
    nas::Dataset ds;
    if (!data.empty()) {
      require_input(data, "dataset");
      nas::LoadOptions opts;
      opts.max_length = flags.max_length;
      ds = nas::load_jsonl(data, opts);
    } else {
      nas::SyntheticConfig sc;
      sc.inliers = 8;
      sc.outliers = 1;
      sc.items = 5;
      sc.noise_categorical = 1;
      sc.noise_levels = 3;
      sc.noise_numerical = 1;
      sc.seed = flags.seed;
      ds = nas::generate_synthetic(sc).dataset;
    }
    if (instance >= ds.size()) throw nas::ConfigError("--instance is out of range");
    const auto cfg = flags.config();
    const auto model = nas::init_model(ds, cfg);
    const auto rep = nas::gradient_check(model, ds.instances[instance], tolerance);
    const Provenance prov{"gradcheck", config_hash(nas::to_json(cfg)), cfg.seed};
    nas::Json doc{{"max_relative_error", rep.max_relative_error},
                  {"worst_parameter", rep.worst_parameter},
                  {"checked", rep.checked},
                  {"tolerance", rep.tolerance},
                  {"passed", rep.passed},
                  {"provenance", prov.json()}};
    std::cout << doc.dump(2) << '\n';
    return rep.passed ? kExitOk : kExitNumeric;
  }
};

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Expands `--config FILE` into ordinary flags. Lines are `key = value`
/// with `#` comments; keys are long option names without dashes. Keys
/// already given on the command line are skipped.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands({}))
    if (s->get_name() == args[0]) sub = s;
  if (!sub) return args;
  std::string path;
  std::vector<std::string> rest{args[0]};
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw nas::ConfigError("cannot open config file '" + path + "'");
  auto given = [&](const std::string& flag) {
    for (const auto& a : rest)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> injected;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw nas::ConfigError("'" + path + "' line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt || key == "config")
      throw nas::ConfigError("'" + path + "' line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (given(flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") {
        injected.push_back(flag);
      } else if (!(value == "false" || value == "0" || value == "no")) {
        throw nas::ConfigError("'" + path + "' line " + std::to_string(line_no) + ": '" + key + "' takes true or false");
      }
      continue;
    }
    injected.push_back(flag);
    injected.push_back(value);
  }
  rest.insert(rest.begin() + 1, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attributed-sequence embedding and outlier detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nas::kVersion));

  SynthCmd synth;
  TrainCmd train;
  EmbedCmd embed;
  DetectCmd detect;
  SweepCmd sweep;
  GradcheckCmd gradcheck;

  struct Entry {
    CLI::App* app;
    std::function<int()> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", "key = value config file; command-line flags win")->type_name("FILE")->expected(1);
    cmd.add(sub);
    entries.push_back({sub, [&cmd] { return cmd.run(); }});
  };
  add("synth", "generate a synthetic attributed-sequence dataset", synth);
  add("train", "train a model", train);
  add("embed", "write embeddings (or baseline scores) for a dataset", embed);
  add("detect", "k-NN outlier scores and ROC AUC", detect);
  add("sweep", "AUC over a (method, k, d, epochs) grid", sweep);
  add("gradcheck", "compare analytic gradients with finite differences", gradcheck);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(app, std::move(args));
  } catch (const nas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (auto& e : entries)
      if (e.app->parsed()) return e.run();
  } catch (const nas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nas::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const nas::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const nas::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
