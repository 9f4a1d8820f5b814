#pragma once

// Two-phase unsupervised training (reconstruction pretraining of the
// attribute network, then next-item training of the conditioned sequence
// network), finite-difference gradient checking, and model persistence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include "json.hpp"
#include "nas/attribute_net.hpp"
#include "nas/data.hpp"
#include "nas/error.hpp"
#include "nas/numeric.hpp"
#include "nas/sequence_net.hpp"

namespace nas {

struct TrainingConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 10;                     // sequence-phase (or joint) epochs
  std::optional<std::size_t> pretrain_epochs;  // attribute phase; defaults to `epochs`
  std::size_t batch_size = 32;
  std::size_t hidden = 15;  // d (= d_M)
  std::size_t depth = 1;    // M
  std::vector<std::size_t> attribute_hidden;
  bool conditioning = true;
  bool joint_encoder_update = true;
  bool joint_loss = false;
  CandidateGate candidate = CandidateGate::Tanh;
  double clip_norm = 0.0;  // 0 disables clipping
  std::uint64_t seed = 1;

  std::size_t attribute_epochs() const { return pretrain_epochs.value_or(epochs); }

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning rate must be a finite non-negative number");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (hidden < 1) throw ConfigError("d must be >= 1");
    if (depth < 1) throw ConfigError("M must be >= 1");
    if (!attribute_hidden.empty() && attribute_hidden.size() != depth - 1)
      throw ConfigError("attribute hidden widths must list M-1 values");
    if (clip_norm < 0.0) throw ConfigError("clip norm must be >= 0");
  }

  AttributeNetOptions attribute_options() const {
    AttributeNetOptions o;
    o.depth = depth;
    o.code_width = hidden;
    o.hidden_widths = attribute_hidden;
    return o;
  }
};

inline Json to_json(const TrainingConfig& c) {
  Json j{{"learning_rate", c.learning_rate},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"hidden", c.hidden},
         {"depth", c.depth},
         {"attribute_hidden", c.attribute_hidden},
         {"conditioning", c.conditioning},
         {"joint_encoder_update", c.joint_encoder_update},
         {"joint_loss", c.joint_loss},
         {"candidate", candidate_gate_name(c.candidate)},
         {"clip_norm", c.clip_norm},
         {"seed", c.seed}};
  j["pretrain_epochs"] = c.pretrain_epochs ? Json(*c.pretrain_epochs) : Json(nullptr);
  return j;
}

inline TrainingConfig training_config_from_json(const Json& j) {
  TrainingConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.depth = j.at("depth").get<std::size_t>();
  c.attribute_hidden = j.at("attribute_hidden").get<std::vector<std::size_t>>();
  c.conditioning = j.at("conditioning").get<bool>();
  c.joint_encoder_update = j.at("joint_encoder_update").get<bool>();
  c.joint_loss = j.at("joint_loss").get<bool>();
  c.candidate = candidate_gate_from_name(j.at("candidate").get<std::string>());
  c.clip_norm = j.at("clip_norm").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("pretrain_epochs").is_null()) c.pretrain_epochs = j.at("pretrain_epochs").get<std::size_t>();
  return c;
}

struct LossRecord {
  std::size_t epoch = 0;
  std::string phase;  // "attribute", "sequence" or "joint"
  double mean_loss = 0.0;

  bool operator==(const LossRecord&) const = default;
};

struct ModelParams {
  AttributeNetParams attribute;
  SequenceNetParams sequence;
  ItemVocabulary vocabulary;
  AttributeSchema schema;
  TrainingConfig config;
  std::vector<LossRecord> history;
};

/// Throws ConfigError when the two networks cannot be paired.
inline void validate_model(const ModelParams& m) {
  if (m.attribute.code_width() != m.sequence.hidden())
    throw ConfigError("attribute code width d_M=" + std::to_string(m.attribute.code_width()) +
                      " differs from sequence hidden width d=" + std::to_string(m.sequence.hidden()));
  if (m.sequence.items() != m.vocabulary.size())
    throw ConfigError("output layer has " + std::to_string(m.sequence.items()) + " rows but the vocabulary has " +
                      std::to_string(m.vocabulary.size()) + " items");
  if (m.attribute.input_width() != m.schema.width())
    throw ConfigError("attribute network input width does not match the schema width");
}

/// Glorot-uniform W matrices, orthogonal U matrices, zero biases. The
/// attribute network is drawn first, then the sequence network, from one
/// stream seeded by `config.seed`.
inline ModelParams init_model(const Dataset& dataset, const TrainingConfig& config) {
  config.validate();
  if (dataset.size() == 0) throw InputDomainError("init_model: dataset is empty");
  if (dataset.item_count() == 0) throw InputDomainError("init_model: empty vocabulary");
  RandomSource rng(config.seed);
  ModelParams m;
  m.attribute = make_attribute_net(dataset.attribute_width(), config.attribute_options(), rng);
  m.sequence = make_sequence_net(dataset.item_count(), config.hidden, config.candidate, rng);
  m.vocabulary = dataset.vocabulary;
  m.schema = dataset.schema;
  m.config = config;
  validate_model(m);
  return m;
}

namespace detail {

inline std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  return order;
}

inline void check_finite_loss(double loss, const std::string& phase, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(loss))
    throw NumericError("non-finite " + phase + " loss at epoch " + std::to_string(epoch) + ", batch " +
                       std::to_string(batch));
}

inline double clip_scale(double squared_norm, double clip_norm) {
  if (clip_norm <= 0.0) return 1.0;
  const double norm = std::sqrt(squared_norm);
  return norm > clip_norm ? clip_norm / norm : 1.0;
}

inline std::size_t layer_count_encoder(const AttributeNetParams& p) { return p.depth(); }

}  // namespace detail

/// Phase 1: minimizes the mean reconstruction loss over shuffled
/// mini-batches for `epochs` epochs. Appends one LossRecord per epoch.
inline void train_attribute_phase(ModelParams& model, const Dataset& ds, const TrainingConfig& cfg,
                                  std::size_t epochs) {
  RandomSource shuffler = RandomSource(cfg.seed).derive(1);
  auto order = detail::identity_order(ds.size());
  const std::size_t first_epoch = model.history.size();
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    shuffler.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      AttributeNetGrads grads = AttributeNetGrads::zeros_like(model.attribute);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const Vector& x = ds.instances[order[k]].attributes;
        const auto fwd = attr_forward(model.attribute, x);
        batch_loss += attr_loss(x, fwd.reconstruction);
        grads += attr_backward(model.attribute, fwd.trace, x);
      }
      detail::check_finite_loss(batch_loss, "attribute", epoch, batch_no + 1);
      const double inv = 1.0 / static_cast<double>(end - start);
      grads *= inv * detail::clip_scale(grads.squared_norm() * inv * inv, cfg.clip_norm);
      apply_update(model.attribute, grads, cfg.learning_rate);
      epoch_loss += batch_loss;
    }
    model.history.push_back({first_epoch + epoch, "attribute", epoch_loss / static_cast<double>(ds.size())});
  }
  // Epoch numbers restart per phase.
  for (std::size_t i = first_epoch; i < model.history.size(); ++i) model.history[i].epoch = i - first_epoch + 1;
}

/// Phase 2 (or the joint-loss schedule): minimizes the mean per-sequence
/// cross-entropy. With conditioning on and `joint_encoder_update` set, the
/// gradient reaching V^(M) through the first hidden state updates the
/// encoder layers; decoder layers are frozen unless `joint_loss` is set, in
/// which case the reconstruction loss is added and every layer trains.
inline void train_sequence_phase(ModelParams& model, const Dataset& ds, const TrainingConfig& cfg,
                                 std::size_t epochs) {
  RandomSource shuffler = RandomSource(cfg.seed).derive(2);
  auto order = detail::identity_order(ds.size());
  const bool cond = cfg.conditioning;
  const bool update_encoder = cond && (cfg.joint_encoder_update || cfg.joint_loss);
  const std::string phase = cfg.joint_loss ? "joint" : "sequence";
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    shuffler.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      SequenceNetParams seq_grads = zeros_like(model.sequence);
      AttributeNetGrads attr_grads = AttributeNetGrads::zeros_like(model.attribute);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const auto& inst = ds.instances[order[k]];
        std::optional<AttributeForward> afwd;
        if (cond || cfg.joint_loss) afwd = attr_forward(model.attribute, inst.attributes);
        const auto sfwd = seq_forward(model.sequence, cond ? &afwd->code : nullptr, inst.items);
        batch_loss += sfwd.loss;
        auto back = seq_backward(model.sequence, sfwd.trace);
        seq_grads += back.grads;
        if (cfg.joint_loss) {
          batch_loss += attr_loss(inst.attributes, afwd->reconstruction);
          attr_grads += attr_backward(model.attribute, afwd->trace, inst.attributes);
        }
        if (update_encoder) attr_backward_code(model.attribute, afwd->trace, back.code_grad, attr_grads);
      }
      detail::check_finite_loss(batch_loss, phase, epoch, batch_no + 1);
      const double inv = 1.0 / static_cast<double>(end - start);
      double sq = squared_norm(seq_grads);
      if (update_encoder || cfg.joint_loss) sq += attr_grads.squared_norm();
      const double scale = inv * detail::clip_scale(sq * inv * inv, cfg.clip_norm);
      seq_grads *= scale;
      apply_update(model.sequence, seq_grads, cfg.learning_rate);
      if (cfg.joint_loss) {
        attr_grads *= scale;
        apply_update(model.attribute, attr_grads, cfg.learning_rate);
      } else if (update_encoder) {
        attr_grads *= scale;
        apply_update(model.attribute, attr_grads, cfg.learning_rate, 0, model.attribute.depth());
      }
      epoch_loss += batch_loss;
    }
    model.history.push_back({epoch, phase, epoch_loss / static_cast<double>(ds.size())});
  }
}

/// Trains an already initialized model in place according to `cfg`.
inline void train_model(ModelParams& model, const Dataset& ds, const TrainingConfig& cfg) {
  cfg.validate();
  if (ds.size() == 0) throw InputDomainError("train: dataset is empty");
  validate_model(model);
  if (cfg.conditioning && !cfg.joint_loss) train_attribute_phase(model, ds, cfg, cfg.attribute_epochs());
  train_sequence_phase(model, ds, cfg, cfg.epochs);
  model.config = cfg;
}

/// init_model followed by train_model. Instance labels are never read.
inline ModelParams train(const Dataset& ds, const TrainingConfig& cfg) {
  ModelParams model = init_model(ds, cfg);
  train_model(model, ds, cfg);
  return model;
}

// ---------------------------------------------------------------------------
// Inference helpers
// ---------------------------------------------------------------------------

/// Attribute code used to condition `inst`, or nullopt for unconditioned models.
inline std::optional<Vector> condition_for(const ModelParams& model, const Vector& attributes) {
  if (!model.config.conditioning) return std::nullopt;
  return attr_encode(model.attribute, attributes);
}

/// Embedding c^(l) of one instance: a single read-only forward pass.
inline Vector embed_instance(const ModelParams& model, const AttributedSequence& inst) {
  const auto code = condition_for(model, inst.attributes);
  return extract_embedding(model.sequence, code ? &*code : nullptr, inst.items);
}

inline std::vector<Vector> embed_dataset(const ModelParams& model, const Dataset& ds) {
  std::vector<Vector> out;
  out.reserve(ds.size());
  for (const auto& inst : ds.instances) out.push_back(embed_instance(model, inst));
  return out;
}

/// Mean per-sequence loss of the trained objective(s) on `ds`.
inline double mean_sequence_loss(const ModelParams& model, const Dataset& ds) {
  double total = 0.0;
  for (const auto& inst : ds.instances) {
    const auto code = condition_for(model, inst.attributes);
    total += seq_forward(model.sequence, code ? &*code : nullptr, inst.items).loss;
  }
  return total / static_cast<double>(ds.size());
}

inline double mean_attribute_loss(const ModelParams& model, const Dataset& ds) {
  double total = 0.0;
  for (const auto& inst : ds.instances)
    total += attr_loss(inst.attributes, attr_forward(model.attribute, inst.attributes).reconstruction);
  return total / static_cast<double>(ds.size());
}

/// Fraction of prediction steps whose argmax equals the target item.
/// Steps before `from_step` (1-based) are skipped.
inline double next_item_accuracy(const ModelParams& model, const Dataset& ds, std::size_t from_step = 1) {
  std::size_t hits = 0, total = 0;
  for (const auto& inst : ds.instances) {
    const auto code = condition_for(model, inst.attributes);
    const auto fwd = seq_forward(model.sequence, code ? &*code : nullptr, inst.items);
    for (std::size_t t = from_step - 1; t < fwd.trace.length(); ++t) {
      Eigen::Index best = 0;
      fwd.trace.predictions[t].maxCoeff(&best);
      hits += static_cast<std::size_t>(best) == fwd.trace.targets[t];
      ++total;
    }
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Relative error with an absolute floor so entries where both gradients
/// vanish compare as equal.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace detail {

template <typename Block>
void check_block(Block& block, const Block& analytic, const std::string& name, double step,
                 const std::function<double()>& loss, GradientCheckReport& rep) {
  for (Eigen::Index i = 0; i < block.size(); ++i) {
    double& v = block.data()[i];
    const double saved = v;
    v = saved + step;
    const double up = loss();
    v = saved - step;
    const double down = loss();
    v = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic.data()[i], numeric);
    ++rep.checked;
    if (err > rep.max_relative_error || rep.worst_parameter.empty()) {
      if (err >= rep.max_relative_error) {
        rep.max_relative_error = err;
        rep.worst_parameter = name + "[" + std::to_string(i) + "]";
      }
    }
  }
}

}  // namespace detail

/// Compares every analytic gradient against central differences:
/// L_A w.r.t. all attribute-network parameters, L_S w.r.t. all
/// sequence-network parameters, and (when conditioned) L_S w.r.t. the
/// encoder layers through the first-step conditioning path.
inline GradientCheckReport gradient_check(const ModelParams& model, const AttributedSequence& inst, double tolerance,
                                          double step = 1e-5) {
  GradientCheckReport rep;
  rep.tolerance = tolerance;
  ModelParams work = model;
  const bool cond = model.config.conditioning;
  const Vector& x = inst.attributes;

  // L_A
  {
    const auto fwd = attr_forward(work.attribute, x);
    const auto g = attr_backward(work.attribute, fwd.trace, x);
    auto loss = [&] { return attr_loss(x, attr_forward(work.attribute, x).reconstruction); };
    for (std::size_t l = 0; l < work.attribute.layers.size(); ++l) {
      detail::check_block(work.attribute.layers[l].weight, g.weight[l], "L_A/W_A" + std::to_string(l + 1), step, loss, rep);
      detail::check_block(work.attribute.layers[l].bias, g.bias[l], "L_A/b_A" + std::to_string(l + 1), step, loss, rep);
    }
  }

  // L_S
  auto seq_loss = [&] {
    if (!cond) return seq_forward(work.sequence, nullptr, inst.items).loss;
    const Vector code = attr_encode(work.attribute, x);
    return seq_forward(work.sequence, &code, inst.items).loss;
  };
  const auto afwd = attr_forward(work.attribute, x);
  const auto sfwd = seq_forward(work.sequence, cond ? &afwd.code : nullptr, inst.items);
  const auto back = seq_backward(work.sequence, sfwd.trace);
  {
    SequenceNetParams analytic = back.grads;
    std::vector<std::pair<std::string, const void*>> dummy;
    // Walk the live parameters and the analytic gradients in lockstep.
    std::vector<Matrix*> live_m;
    std::vector<Vector*> live_v;
    std::vector<const Matrix*> an_m;
    std::vector<const Vector*> an_v;
    std::vector<std::string> names_m, names_v;
    for_each_block(work.sequence, [&](const std::string& name, auto& block) {
      if constexpr (std::is_same_v<std::decay_t<decltype(block)>, Matrix>) {
        live_m.push_back(&block);
        names_m.push_back(name);
      } else {
        live_v.push_back(&block);
        names_v.push_back(name);
      }
    });
    for_each_block(analytic, [&](const std::string&, const auto& block) {
      if constexpr (std::is_same_v<std::decay_t<decltype(block)>, Matrix>) {
        an_m.push_back(&block);
      } else {
        an_v.push_back(&block);
      }
    });
    for (std::size_t i = 0; i < live_m.size(); ++i)
      detail::check_block(*live_m[i], *an_m[i], "L_S/" + names_m[i], step, seq_loss, rep);
    for (std::size_t i = 0; i < live_v.size(); ++i)
      detail::check_block(*live_v[i], *an_v[i], "L_S/" + names_v[i], step, seq_loss, rep);
  }

  // L_S through the conditioning path into the encoder.
  if (cond) {
    AttributeNetGrads g = AttributeNetGrads::zeros_like(work.attribute);
    attr_backward_code(work.attribute, afwd.trace, back.code_grad, g);
    for (std::size_t l = 0; l < work.attribute.depth(); ++l) {
      detail::check_block(work.attribute.layers[l].weight, g.weight[l], "L_S/W_A" + std::to_string(l + 1), step, seq_loss, rep);
      detail::check_block(work.attribute.layers[l].bias, g.bias[l], "L_S/b_A" + std::to_string(l + 1), step, seq_loss, rep);
    }
  }
  rep.passed = rep.max_relative_error < tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

inline Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
    throw CorruptFileError("matrix payload does not match its shape");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

inline Vector vector_from_json(const Json& j) {
  const auto data = j.get<std::vector<double>>();
  Vector v(static_cast<Eigen::Index>(data.size()));
  std::copy(data.begin(), data.end(), v.data());
  return v;
}

}  // namespace detail

/// Self-describing JSON document. Sequence blocks are stored in the order
/// W_i U_i b_i W_f U_f b_f W_o U_o b_o W_g U_g b_g W_y b_y; matrices are
/// row-major.
inline Json model_to_json(const ModelParams& m) {
  Json layers = Json::array();
  for (const auto& l : m.attribute.layers)
    layers.push_back(Json{{"activation", activation_name(l.activation)},
                          {"weight", detail::matrix_to_json(l.weight)},
                          {"bias", detail::vector_to_json(l.bias)}});
  Json blocks = Json::array();
  for_each_block(m.sequence, [&](const std::string& name, const auto& block) {
    if constexpr (std::is_same_v<std::decay_t<decltype(block)>, Matrix>) {
      blocks.push_back(Json{{"name", name}, {"matrix", detail::matrix_to_json(block)}});
    } else {
      blocks.push_back(Json{{"name", name}, {"vector", detail::vector_to_json(block)}});
    }
  });
  Json history = Json::array();
  for (const auto& h : m.history)
    history.push_back(Json{{"epoch", h.epoch}, {"phase", h.phase}, {"mean_loss", h.mean_loss}});
  return Json{{"format", "nas-model"},
              {"version", kModelFormatVersion},
              {"config", to_json(m.config)},
              {"vocabulary", to_json(m.vocabulary)},
              {"schema", to_json(m.schema)},
              {"attribute", Json{{"layers", std::move(layers)}}},
              {"sequence", Json{{"candidate", candidate_gate_name(m.sequence.candidate_activation)},
                                {"items", m.sequence.items()},
                                {"hidden", m.sequence.hidden()},
                                {"blocks", std::move(blocks)}}},
              {"history", std::move(history)}};
}

inline ModelParams model_from_json(const Json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "nas-model") throw CorruptFileError("not a model document");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw CorruptFileError("model document has no version tag");
  const int version = doc["version"].get<int>();
  if (version != kModelFormatVersion)
    throw VersionError("model format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kModelFormatVersion) + ")");
  try {
    ModelParams m;
    m.config = training_config_from_json(doc.at("config"));
    m.vocabulary = vocabulary_from_json(doc.at("vocabulary"));
    m.schema = schema_from_json(doc.at("schema"));
    for (const auto& jl : doc.at("attribute").at("layers")) {
      DenseLayer l;
      l.activation = activation_from_name(jl.at("activation").get<std::string>());
      l.weight = detail::matrix_from_json(jl.at("weight"));
      l.bias = detail::vector_from_json(jl.at("bias"));
      if (l.bias.size() != l.weight.rows()) throw CorruptFileError("attribute layer bias/weight mismatch");
      m.attribute.layers.push_back(std::move(l));
    }
    if (m.attribute.layers.empty() || m.attribute.layers.size() % 2 != 0)
      throw CorruptFileError("attribute network must have an even, non-zero layer count");
    const auto& js = doc.at("sequence");
    m.sequence = make_zero_sequence_net(js.at("items").get<std::size_t>(), js.at("hidden").get<std::size_t>(),
                                        candidate_gate_from_name(js.at("candidate").get<std::string>()));
    const auto& blocks = js.at("blocks");
    std::size_t idx = 0;
    for_each_block(m.sequence, [&](const std::string& name, auto& block) {
      if (idx >= blocks.size()) throw CorruptFileError("sequence network is missing block " + name);
      const auto& jb = blocks[idx++];
      if (jb.at("name").get<std::string>() != name) throw CorruptFileError("unexpected sequence block order at " + name);
      using Block = std::decay_t<decltype(block)>;
      Block loaded;
      if constexpr (std::is_same_v<Block, Matrix>) {
        loaded = detail::matrix_from_json(jb.at("matrix"));
      } else {
        loaded = detail::vector_from_json(jb.at("vector"));
      }
      if (loaded.rows() != block.rows() || loaded.cols() != block.cols())
        throw CorruptFileError("sequence block " + name + " has the wrong shape");
      block = std::move(loaded);
    });
    for (const auto& jh : doc.at("history"))
      m.history.push_back({jh.at("epoch").get<std::size_t>(), jh.at("phase").get<std::string>(),
                           jh.at("mean_loss").get<double>()});
    validate_model(m);
    return m;
  } catch (const Json::exception& e) {
    throw CorruptFileError(std::string("model document is incomplete: ") + e.what());
  } catch (const ConfigError& e) {
    throw CorruptFileError(std::string("model document is inconsistent: ") + e.what());
  }
}

inline void save_model(const ModelParams& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << model_to_json(m).dump() << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

inline ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw CorruptFileError("'" + path + "': " + e.what());
  }
  return model_from_json(doc);
}

/// Loss history as CSV: epoch,phase,mean_loss.
inline void write_loss_csv(const std::vector<LossRecord>& history, std::ostream& out) {
  std::ostringstream line;
  out << "epoch,phase,mean_loss\n";
  for (const auto& h : history) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", h.mean_loss);
    out << h.epoch << ',' << h.phase << ',' << buf << '\n';
  }
}

}  // namespace nas
