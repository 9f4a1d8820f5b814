#pragma once

// Sequence network: an LSTM over one-hot items whose first hidden state is
// conditioned additively on the attribute code, with a softmax layer that
// predicts the next item. Forward pass, BPTT, and embedding extraction.

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "nas/error.hpp"
#include "nas/numeric.hpp"

namespace nas {

/// Activation of the LSTM candidate gate g.
enum class CandidateGate { Sigmoid, Tanh };

inline const char* candidate_gate_name(CandidateGate g) { return g == CandidateGate::Sigmoid ? "sigmoid" : "tanh"; }

inline CandidateGate candidate_gate_from_name(const std::string& s) {
  if (s == "sigmoid") return CandidateGate::Sigmoid;
  if (s == "tanh") return CandidateGate::Tanh;
  throw ConfigError("unknown candidate gate '" + s + "' (expected sigmoid|tanh)");
}

struct LstmGate {
  Matrix input;      // W: d x (r+1)
  Matrix recurrent;  // U: d x d
  Vector bias;       // b: d
};

struct SequenceNetParams {
  LstmGate input_gate;
  LstmGate forget_gate;
  LstmGate output_gate;
  LstmGate candidate;
  Matrix output_weight;  // W_y: r x d
  Vector output_bias;    // b_y: r
  CandidateGate candidate_activation = CandidateGate::Tanh;

  std::size_t hidden() const { return static_cast<std::size_t>(output_weight.cols()); }
  std::size_t items() const { return static_cast<std::size_t>(output_weight.rows()); }
  std::size_t input_width() const { return items() + 1; }
  std::size_t start_index() const { return items(); }
};

/// Calls `f(name, block)` for every trainable matrix/vector, in a fixed order.
template <typename Params, typename F>
void for_each_block(Params& p, F&& f) {
  auto gate = [&](auto& g, const char* name) {
    f(std::string("W_") + name, g.input);
    f(std::string("U_") + name, g.recurrent);
    f(std::string("b_") + name, g.bias);
  };
  gate(p.input_gate, "i");
  gate(p.forget_gate, "f");
  gate(p.output_gate, "o");
  gate(p.candidate, "g");
  f(std::string("W_y"), p.output_weight);
  f(std::string("b_y"), p.output_bias);
}

/// Parameters with every block set to zero, shaped like `p`.
inline SequenceNetParams zeros_like(const SequenceNetParams& p) {
  SequenceNetParams z = p;
  for_each_block(z, [](const std::string&, auto& block) { block.setZero(); });
  return z;
}

inline SequenceNetParams make_zero_sequence_net(std::size_t items, std::size_t hidden,
                                                CandidateGate cand = CandidateGate::Tanh) {
  if (items < 1 || hidden < 1) throw ConfigError("sequence network needs r >= 1 and d >= 1");
  SequenceNetParams p;
  const auto d = static_cast<Eigen::Index>(hidden);
  const auto in = static_cast<Eigen::Index>(items + 1);
  for (LstmGate* g : {&p.input_gate, &p.forget_gate, &p.output_gate, &p.candidate}) {
    g->input = Matrix::Zero(d, in);
    g->recurrent = Matrix::Zero(d, d);
    g->bias = Vector::Zero(d);
  }
  p.output_weight = Matrix::Zero(static_cast<Eigen::Index>(items), d);
  p.output_bias = Vector::Zero(static_cast<Eigen::Index>(items));
  p.candidate_activation = cand;
  return p;
}

/// Glorot-uniform input/output weights, orthogonal recurrent weights, zero biases.
inline SequenceNetParams make_sequence_net(std::size_t items, std::size_t hidden, CandidateGate cand,
                                           RandomSource& rng) {
  SequenceNetParams p = make_zero_sequence_net(items, hidden, cand);
  for (LstmGate* g : {&p.input_gate, &p.forget_gate, &p.output_gate, &p.candidate}) {
    g->input = glorot_uniform(hidden, items + 1, rng);
    g->recurrent = orthogonal_init(hidden, rng);
  }
  p.output_weight = glorot_uniform(items, hidden, rng);
  return p;
}

inline SequenceNetParams& operator+=(SequenceNetParams& acc, const SequenceNetParams& g) {
  auto add_gate = [](LstmGate& a, const LstmGate& b) {
    a.input += b.input;
    a.recurrent += b.recurrent;
    a.bias += b.bias;
  };
  add_gate(acc.input_gate, g.input_gate);
  add_gate(acc.forget_gate, g.forget_gate);
  add_gate(acc.output_gate, g.output_gate);
  add_gate(acc.candidate, g.candidate);
  acc.output_weight += g.output_weight;
  acc.output_bias += g.output_bias;
  return acc;
}

inline SequenceNetParams& operator*=(SequenceNetParams& acc, double s) {
  for_each_block(acc, [s](const std::string&, auto& block) { block *= s; });
  return acc;
}

inline double squared_norm(const SequenceNetParams& p) {
  double s = 0.0;
  for_each_block(p, [&s](const std::string&, const auto& block) { s += block.squaredNorm(); });
  return s;
}

/// params -= lr * grads
inline void apply_update(SequenceNetParams& params, const SequenceNetParams& grads, double lr) {
  auto upd = [lr](LstmGate& a, const LstmGate& g) {
    a.input.noalias() -= lr * g.input;
    a.recurrent.noalias() -= lr * g.recurrent;
    a.bias.noalias() -= lr * g.bias;
  };
  upd(params.input_gate, grads.input_gate);
  upd(params.forget_gate, grads.forget_gate);
  upd(params.output_gate, grads.output_gate);
  upd(params.candidate, grads.candidate);
  params.output_weight.noalias() -= lr * grads.output_weight;
  params.output_bias.noalias() -= lr * grads.output_bias;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

struct LstmStep {
  Vector i, f, o, g;  // gates
  Vector c;           // cell state c^(t)
  Vector tanh_c;
  Vector h;           // hidden state, including the conditioning term at t = 1
};

/// One LSTM step. `input` is the position of the 1 in the one-hot input
/// (the start symbol is index r). `condition` may only be supplied at t = 1.
inline LstmStep lstm_step(const SequenceNetParams& p, std::size_t input, const Vector& prev_h, const Vector& prev_c,
                          const Vector* condition, std::size_t t) {
  const auto d = static_cast<Eigen::Index>(p.hidden());
  if (input >= p.input_width())
    throw InputDomainError("lstm_step: input index " + std::to_string(input) + " out of range");
  if (prev_h.size() != d || prev_c.size() != d) throw InputDomainError("lstm_step: state dimension mismatch");
  if (condition) {
    if (t != 1) throw InputDomainError("lstm_step: conditioning is only defined at t = 1");
    if (condition->size() != d)
      throw InputDomainError("lstm_step: condition has dimension " + std::to_string(condition->size()) +
                             ", hidden width is " + std::to_string(d));
  }
  const auto col = static_cast<Eigen::Index>(input);
  auto pre = [&](const LstmGate& g) -> Vector { return g.input.col(col) + g.recurrent * prev_h + g.bias; };
  LstmStep s;
  s.i = sigmoid(pre(p.input_gate));
  s.f = sigmoid(pre(p.forget_gate));
  s.o = sigmoid(pre(p.output_gate));
  s.g = p.candidate_activation == CandidateGate::Sigmoid ? sigmoid(pre(p.candidate)) : tanh(pre(p.candidate));
  s.c = (s.f.array() * prev_c.array() + s.i.array() * s.g.array()).matrix();
  s.tanh_c = tanh(s.c);
  s.h = (s.o.array() * s.tanh_c.array()).matrix();
  if (condition) s.h += *condition;
  return s;
}

/// Next-item distribution softmax(W_y h + b_y) over the r items.
inline Vector predict_step(const SequenceNetParams& p, const Vector& h) {
  if (static_cast<std::size_t>(h.size()) != p.hidden()) throw InputDomainError("predict_step: hidden dimension mismatch");
  return softmax(p.output_weight * h + p.output_bias);
}

struct SequenceForwardTrace {
  std::vector<std::size_t> inputs;   // start symbol, then items[0..l-2]
  std::vector<std::size_t> targets;  // items[0..l-1]
  std::vector<LstmStep> steps;
  std::vector<Vector> predictions;   // y^(1..l)
  std::vector<double> step_losses;
  bool conditioned = false;
  Vector condition;

  std::size_t length() const { return steps.size(); }
};

struct SequenceForward {
  SequenceForwardTrace trace;
  double loss = 0.0;
};

inline void check_items(const SequenceNetParams& p, const std::vector<std::size_t>& items) {
  if (items.empty()) throw InputDomainError("sequence must contain at least one item");
  for (auto it : items)
    if (it >= p.items()) throw InputDomainError("item index " + std::to_string(it) + " outside the vocabulary");
}

/// Teacher-forced pass: step 1 reads the start symbol, step t > 1 reads
/// items[t-2]; step t is scored against items[t-1]. Loss is the summed
/// categorical cross-entropy.
inline SequenceForward seq_forward(const SequenceNetParams& p, const Vector* code, const std::vector<std::size_t>& items) {
  check_items(p, items);
  const auto d = static_cast<Eigen::Index>(p.hidden());
  SequenceForward out;
  auto& tr = out.trace;
  tr.conditioned = code != nullptr;
  if (code) tr.condition = *code;
  const std::size_t l = items.size();
  tr.steps.reserve(l);
  tr.predictions.reserve(l);
  Vector h = Vector::Zero(d);
  Vector c = Vector::Zero(d);
  for (std::size_t t = 0; t < l; ++t) {
    const std::size_t input = t == 0 ? p.start_index() : items[t - 1];
    tr.inputs.push_back(input);
    tr.targets.push_back(items[t]);
    tr.steps.push_back(lstm_step(p, input, h, c, t == 0 ? code : nullptr, t + 1));
    h = tr.steps.back().h;
    c = tr.steps.back().c;
    tr.predictions.push_back(predict_step(p, h));
    const double loss_t = -std::log(tr.predictions.back()(static_cast<Eigen::Index>(items[t])));
    tr.step_losses.push_back(loss_t);
    out.loss += loss_t;
  }
  return out;
}

inline SequenceForward seq_forward(const SequenceNetParams& p, const Vector& code, const std::vector<std::size_t>& items) {
  return seq_forward(p, &code, items);
}

// ---------------------------------------------------------------------------
// Backward (BPTT)
// ---------------------------------------------------------------------------

struct SequenceBackward {
  SequenceNetParams grads;
  Vector code_grad;  // dL/dV^(M); zero when unconditioned
};

inline SequenceBackward seq_backward(const SequenceNetParams& p, const SequenceForwardTrace& tr) {
  const auto d = static_cast<Eigen::Index>(p.hidden());
  const std::size_t l = tr.length();
  if (l == 0 || tr.predictions.size() != l || tr.inputs.size() != l || tr.targets.size() != l)
    throw InternalError("seq_backward: inconsistent trace");
  if (tr.steps.front().h.size() != d) throw InternalError("seq_backward: trace does not match parameters");

  SequenceBackward out;
  out.grads = zeros_like(p);
  out.code_grad = Vector::Zero(d);
  auto& g = out.grads;

  Vector dh_next = Vector::Zero(d);
  Vector dc_next = Vector::Zero(d);
  const Vector zero = Vector::Zero(d);

  for (std::size_t t = l; t-- > 0;) {
    const LstmStep& s = tr.steps[t];
    const Vector& h_prev = t == 0 ? zero : tr.steps[t - 1].h;
    const Vector& c_prev = t == 0 ? zero : tr.steps[t - 1].c;

    Vector dlogits = tr.predictions[t];
    dlogits(static_cast<Eigen::Index>(tr.targets[t])) -= 1.0;
    g.output_weight.noalias() += dlogits * s.h.transpose();
    g.output_bias += dlogits;

    Vector dh = p.output_weight.transpose() * dlogits + dh_next;
    if (t == 0 && tr.conditioned) out.code_grad = dh;

    const Vector d_o = (dh.array() * s.tanh_c.array()).matrix();
    const Vector dc = (dh.array() * s.o.array() * (1.0 - s.tanh_c.array().square())).matrix() + dc_next;
    const Vector d_i = (dc.array() * s.g.array()).matrix();
    const Vector d_g = (dc.array() * s.i.array()).matrix();
    const Vector d_f = (dc.array() * c_prev.array()).matrix();
    dc_next = (dc.array() * s.f.array()).matrix();

    const Vector dz_i = (d_i.array() * s.i.array() * (1.0 - s.i.array())).matrix();
    const Vector dz_f = (d_f.array() * s.f.array() * (1.0 - s.f.array())).matrix();
    const Vector dz_o = (d_o.array() * s.o.array() * (1.0 - s.o.array())).matrix();
    const Vector dz_g = p.candidate_activation == CandidateGate::Sigmoid
                            ? Vector((d_g.array() * s.g.array() * (1.0 - s.g.array())).matrix())
                            : Vector((d_g.array() * (1.0 - s.g.array().square())).matrix());

    const auto col = static_cast<Eigen::Index>(tr.inputs[t]);
    auto acc = [&](LstmGate& gg, const LstmGate& pg, const Vector& dz) {
      gg.input.col(col) += dz;
      gg.bias += dz;
      if (t > 0) gg.recurrent.noalias() += dz * h_prev.transpose();
      return Vector(pg.recurrent.transpose() * dz);
    };
    dh_next = acc(g.input_gate, p.input_gate, dz_i);
    dh_next += acc(g.forget_gate, p.forget_gate, dz_f);
    dh_next += acc(g.output_gate, p.output_gate, dz_o);
    dh_next += acc(g.candidate, p.candidate, dz_g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

/// Final cell state c^(l) of a forward pass over `items`; parameters are
/// only read.
inline Vector extract_embedding(const SequenceNetParams& p, const Vector* code, const std::vector<std::size_t>& items) {
  check_items(p, items);
  const auto d = static_cast<Eigen::Index>(p.hidden());
  Vector h = Vector::Zero(d);
  Vector c = Vector::Zero(d);
  for (std::size_t t = 0; t < items.size(); ++t) {
    const std::size_t input = t == 0 ? p.start_index() : items[t - 1];
    LstmStep s = lstm_step(p, input, h, c, t == 0 ? code : nullptr, t + 1);
    h = std::move(s.h);
    c = std::move(s.c);
  }
  return c;
}

}  // namespace nas
