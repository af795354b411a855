// Deterministic sequence-learning engine: dense/LSTM/dropout/concat graphs,
// reverse-mode gradients with backpropagation through time, Adam, binary
// cross-entropy with an optional embedding-regression term, training loop,
// finite-difference gradient checking, and JSON checkpoints.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyberseer/common.hpp"
#include "cyberseer/csv.hpp"
#include "cyberseer/tensor.hpp"

namespace cyberseer::nnet {

enum class Activation { linear, tanh, relu, sigmoid };

inline Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::linear;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  fail(ErrorKind::invalid_config, "unknown activation: " + s);
}

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::linear: return z;
    case Activation::tanh: return std::tanh(z);
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative in terms of pre-activation z and the activated output.
inline double activation_derivative(Activation a, double z, double out) {
  switch (a) {
    case Activation::linear: return 1.0;
    case Activation::tanh: return 1.0 - out * out;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return out * (1.0 - out);
  }
  return 1.0;
}

namespace detail {

inline double dot(const double* a, const double* b, size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// out (+=) W * x
inline void matvec(const Tensor2& w, const double* x, double* out, bool accumulate) {
  for (size_t r = 0; r < w.rows; ++r) {
    double v = dot(w.row_ptr(r), x, w.cols);
    out[r] = accumulate ? out[r] + v : v;
  }
}

// out += W^T * g   (out has w.cols entries)
inline void matvec_transposed_acc(const Tensor2& w, const double* g, double* out) {
  for (size_t r = 0; r < w.rows; ++r) {
    const double* row = w.row_ptr(r);
    double gr = g[r];
    if (gr == 0.0) continue;
    for (size_t c = 0; c < w.cols; ++c) out[c] += gr * row[c];
  }
}

// dW += g * x^T
inline void outer_acc(Tensor2& dw, const double* g, const double* x) {
  for (size_t r = 0; r < dw.rows; ++r) {
    double gr = g[r];
    if (gr == 0.0) continue;
    double* row = dw.row_ptr(r);
    for (size_t c = 0; c < dw.cols; ++c) row[c] += gr * x[c];
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loss

enum class RegKind { mse, mae };

inline RegKind reg_from_string(const std::string& s) {
  if (s == "mse") return RegKind::mse;
  if (s == "mae") return RegKind::mae;
  fail(ErrorKind::invalid_config, "unknown regression loss: " + s);
}

inline const char* to_string(RegKind r) { return r == RegKind::mse ? "mse" : "mae"; }

struct LossSpec {
  double beta = 0.0;
  RegKind reg = RegKind::mse;
};

struct LossParts {
  double total = 0.0;
  double pre = 0.0;  // binary cross-entropy
  double reg = 0.0;  // embedding regression
};

inline constexpr double kProbClamp = 1e-7;

// L = BCE(p, y) + beta * reg(e, t); p is clamped away from {0, 1}.
inline LossParts compute_loss(const LossSpec& spec, double p, double y,
                              const std::vector<double>& embedding = {},
                              const std::vector<double>& teacher = {}) {
  double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  LossParts parts;
  parts.pre = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  if (spec.beta > 0.0) {
    if (embedding.size() != teacher.size() || embedding.empty())
      fail(ErrorKind::shape_error, "loss: embedding/teacher width mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < embedding.size(); ++i) {
      double d = embedding[i] - teacher[i];
      acc += spec.reg == RegKind::mse ? d * d : std::fabs(d);
    }
    parts.reg = acc / static_cast<double>(embedding.size());
  }
  parts.total = parts.pre + spec.beta * parts.reg;
  return parts;
}

// ---------------------------------------------------------------------------
// Graph

enum class LayerKind { input_seq, input_vec, lstm, dense, dropout, concat };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::input_seq: return "input_seq";
    case LayerKind::input_vec: return "input_vec";
    case LayerKind::lstm: return "lstm";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::concat: return "concat";
  }
  return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "input_seq") return LayerKind::input_seq;
  if (s == "input_vec") return LayerKind::input_vec;
  if (s == "lstm") return LayerKind::lstm;
  if (s == "dense") return LayerKind::dense;
  if (s == "dropout") return LayerKind::dropout;
  if (s == "concat") return LayerKind::concat;
  fail(ErrorKind::corrupt_file, "unknown layer kind: " + s);
}

struct NodeDesc {
  LayerKind kind;
  std::string name;
  std::vector<int> inputs;  // node ids, always earlier than this node
  int width = 0;            // output width (input_seq: feature rows per step)
  Activation activation = Activation::linear;
  double dropout_rate = 0.0;
};

// One training/inference example: tensors aligned with the graph's input
// nodes in creation order, plus label and optional regression target.
struct Sample {
  std::vector<Tensor2> inputs;
  double label = 0.0;
  std::vector<double> teacher;
};

using ParamSet = std::vector<std::vector<Tensor2>>;  // per node, per tensor

class ModelGraph;

// Per-sample forward records, consumed by backward().
struct Tape {
  struct LstmCache {
    Tensor2 gi, gf, gg, go;  // activated gates, units x T
    Tensor2 c, tc;           // cell state and tanh(cell), units x T
    Tensor2 h;               // hidden states, units x T
  };
  std::vector<std::vector<double>> out;        // per-node output vector
  std::vector<LstmCache> lstm;                 // filled for lstm nodes
  std::vector<std::vector<double>> dense_z;    // pre-activations
  std::vector<std::vector<double>> dropout_mask;
  const Sample* sample = nullptr;
};

class ModelGraph {
 public:
  ModelGraph() = default;

  // -- construction -------------------------------------------------------

  int add_input_sequence(const std::string& name, int feature_rows) {
    if (feature_rows < 1) fail(ErrorKind::invalid_config, "input rows must be >= 1");
    int id = add_node({LayerKind::input_seq, name, {}, feature_rows, Activation::linear, 0.0});
    input_nodes_.push_back(id);
    return id;
  }

  int add_input_vector(const std::string& name, int width) {
    if (width < 1) fail(ErrorKind::invalid_config, "input width must be >= 1");
    int id = add_node({LayerKind::input_vec, name, {}, width, Activation::linear, 0.0});
    input_nodes_.push_back(id);
    return id;
  }

  int add_lstm(const std::string& name, int input, int units) {
    check_node(input);
    if (nodes_[input].kind != LayerKind::input_seq)
      fail(ErrorKind::invalid_config, "lstm must consume a sequence input");
    if (units < 1) fail(ErrorKind::invalid_config, "lstm units must be >= 1");
    int id = add_node({LayerKind::lstm, name, {input}, units, Activation::linear, 0.0});
    int in_width = nodes_[input].width;
    params_[id] = {Tensor2(4 * units, in_width), Tensor2(4 * units, units), Tensor2(4 * units, 1)};
    return id;
  }

  int add_dense(const std::string& name, int input, int units, Activation act) {
    check_vector_node(input);
    if (units < 1) fail(ErrorKind::invalid_config, "dense units must be >= 1");
    int id = add_node({LayerKind::dense, name, {input}, units, act, 0.0});
    params_[id] = {Tensor2(units, nodes_[input].width), Tensor2(units, 1)};
    return id;
  }

  int add_dropout(const std::string& name, int input, double rate) {
    check_vector_node(input);
    if (rate < 0.0 || rate >= 1.0) fail(ErrorKind::invalid_config, "dropout rate must be in [0,1)");
    return add_node({LayerKind::dropout, name, {input}, nodes_[input].width,
                     Activation::linear, rate});
  }

  int add_concat(const std::string& name, const std::vector<int>& inputs) {
    if (inputs.empty()) fail(ErrorKind::invalid_config, "concat needs inputs");
    int width = 0;
    for (int i : inputs) {
      check_vector_node(i);
      width += nodes_[i].width;
    }
    return add_node({LayerKind::concat, name, inputs, width, Activation::linear, 0.0});
  }

  void set_output(int node) {
    check_node(node);
    const auto& d = nodes_[node];
    if (d.kind != LayerKind::dense || d.width != 1 || d.activation != Activation::sigmoid)
      fail(ErrorKind::invalid_config, "output head must be a dense(1, sigmoid) node");
    output_node_ = node;
  }

  // Designates the auxiliary vector: the teacher's representation or the
  // student's physiological embedding.
  void set_representation_node(int node) {
    check_vector_node(node);
    representation_node_ = node;
  }

  void set_input_tags(std::vector<std::string> tags) {
    if (tags.size() != input_nodes_.size())
      fail(ErrorKind::invalid_config, "one tag per input node required");
    input_tags_ = std::move(tags);
  }

  // Glorot-uniform weights; LSTM forget-gate bias starts at 1.
  void init_params(uint64_t seed) {
    seed_ = seed;
    for (size_t id = 0; id < nodes_.size(); ++id) {
      const auto& d = nodes_[id];
      if (d.kind == LayerKind::dense) {
        rng::Engine eng(rng::mix(seed, id, 0xde45eULL));
        glorot_fill(params_[id][0], nodes_[d.inputs[0]].width, d.width, eng);
        std::fill(params_[id][1].data.begin(), params_[id][1].data.end(), 0.0);
      } else if (d.kind == LayerKind::lstm) {
        rng::Engine eng(rng::mix(seed, id, 0x157aULL));
        int in_width = nodes_[d.inputs[0]].width;
        glorot_fill(params_[id][0], in_width, 4 * d.width, eng);
        glorot_fill(params_[id][1], d.width, 4 * d.width, eng);
        auto& b = params_[id][2];
        std::fill(b.data.begin(), b.data.end(), 0.0);
        for (int u = d.width; u < 2 * d.width; ++u) b.data[static_cast<size_t>(u)] = 1.0;
      }
    }
  }

  // -- introspection ------------------------------------------------------

  size_t node_count() const { return nodes_.size(); }
  const NodeDesc& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  const std::vector<int>& input_nodes() const { return input_nodes_; }
  const std::vector<std::string>& input_tags() const { return input_tags_; }
  int output_node() const { return output_node_; }
  int representation_node() const { return representation_node_; }
  uint64_t seed() const { return seed_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  size_t parameter_count() const {
    size_t n = 0;
    for (const auto& tensors : params_)
      for (const auto& t : tensors) n += t.size();
    return n;
  }

  ParamSet zero_like_params() const {
    ParamSet g(params_.size());
    for (size_t i = 0; i < params_.size(); ++i)
      for (const auto& t : params_[i]) g[i].emplace_back(t.rows, t.cols, 0.0);
    return g;
  }

  // -- execution ----------------------------------------------------------

  // dropout_key seeds the counter-based masks; unused in inference mode.
  double forward(const Sample& sample, Tape& tape, bool training, uint64_t dropout_key = 0) const {
    if (output_node_ < 0) fail(ErrorKind::invalid_config, "graph has no output head");
    if (sample.inputs.size() != input_nodes_.size())
      fail(ErrorKind::shape_error, "sample has " + std::to_string(sample.inputs.size()) +
                                       " inputs, graph expects " +
                                       std::to_string(input_nodes_.size()));
    tape.out.assign(nodes_.size(), {});
    tape.lstm.assign(nodes_.size(), {});
    tape.dense_z.assign(nodes_.size(), {});
    tape.dropout_mask.assign(nodes_.size(), {});
    tape.sample = &sample;

    for (size_t id = 0; id < nodes_.size(); ++id) {
      const auto& d = nodes_[id];
      switch (d.kind) {
        case LayerKind::input_seq: {
          const Tensor2& x = input_tensor(sample, static_cast<int>(id));
          if (x.rows != static_cast<size_t>(d.width) || x.cols < 1)
            fail(ErrorKind::shape_error, d.name + ": expected " + std::to_string(d.width) +
                                             " rows, got " + std::to_string(x.rows));
          break;
        }
        case LayerKind::input_vec: {
          const Tensor2& x = input_tensor(sample, static_cast<int>(id));
          if (x.rows != static_cast<size_t>(d.width) || x.cols != 1)
            fail(ErrorKind::shape_error, d.name + ": expected column of " +
                                             std::to_string(d.width) + " values");
          tape.out[id] = x.data;
          break;
        }
        case LayerKind::lstm:
          lstm_forward_node(static_cast<int>(id), sample, tape);
          break;
        case LayerKind::dense: {
          const auto& x = tape.out[static_cast<size_t>(d.inputs[0])];
          auto& z = tape.dense_z[id];
          z.assign(static_cast<size_t>(d.width), 0.0);
          detail::matvec(params_[id][0], x.data(), z.data(), false);
          const auto& b = params_[id][1];
          auto& out = tape.out[id];
          out.resize(z.size());
          for (size_t r = 0; r < z.size(); ++r) {
            z[r] += b.data[r];
            out[r] = apply_activation(d.activation, z[r]);
          }
          break;
        }
        case LayerKind::dropout: {
          const auto& x = tape.out[static_cast<size_t>(d.inputs[0])];
          auto& mask = tape.dropout_mask[id];
          auto& out = tape.out[id];
          mask.assign(x.size(), 1.0);
          out = x;
          if (training && d.dropout_rate > 0.0) {
            double keep_scale = 1.0 / (1.0 - d.dropout_rate);
            for (size_t e = 0; e < x.size(); ++e) {
              double u = rng::counter_uniform(rng::mix(dropout_key, id, e));
              mask[e] = u < d.dropout_rate ? 0.0 : keep_scale;
              out[e] = x[e] * mask[e];
            }
          }
          break;
        }
        case LayerKind::concat: {
          auto& out = tape.out[id];
          out.clear();
          out.reserve(static_cast<size_t>(d.width));
          for (int in : d.inputs) {
            const auto& v = tape.out[static_cast<size_t>(in)];
            out.insert(out.end(), v.begin(), v.end());
          }
          break;
        }
      }
    }
    double p = tape.out[static_cast<size_t>(output_node_)][0];
    if (!std::isfinite(p)) fail(ErrorKind::numerical_failure, "forward produced non-finite output");
    return p;
  }

  // Accumulates parameter gradients for one sample into grads. d_output is
  // dL/dp; d_representation (may be empty) is dL/d(representation vector).
  void backward(const Tape& tape, double d_output, const std::vector<double>& d_representation,
                ParamSet& grads) const {
    std::vector<std::vector<double>> dout(nodes_.size());
    for (size_t id = 0; id < nodes_.size(); ++id)
      dout[id].assign(tape.out[id].size(), 0.0);
    dout[static_cast<size_t>(output_node_)][0] = d_output;
    if (!d_representation.empty()) {
      if (representation_node_ < 0)
        fail(ErrorKind::state_error, "no representation node designated");
      auto& dr = dout[static_cast<size_t>(representation_node_)];
      if (dr.size() != d_representation.size())
        fail(ErrorKind::shape_error, "representation gradient width mismatch");
      for (size_t i = 0; i < dr.size(); ++i) dr[i] += d_representation[i];
    }

    for (size_t idx = nodes_.size(); idx-- > 0;) {
      const auto& d = nodes_[idx];
      const auto& g_out = dout[idx];
      if (g_out.empty() || std::all_of(g_out.begin(), g_out.end(),
                                       [](double v) { return v == 0.0; }))
        continue;
      switch (d.kind) {
        case LayerKind::input_seq:
        case LayerKind::input_vec:
          break;  // data inputs take no gradient
        case LayerKind::dense: {
          const auto& z = tape.dense_z[idx];
          const auto& out = tape.out[idx];
          std::vector<double> dz(z.size());
          for (size_t r = 0; r < z.size(); ++r)
            dz[r] = g_out[r] * activation_derivative(d.activation, z[r], out[r]);
          const auto& x = tape.out[static_cast<size_t>(d.inputs[0])];
          detail::outer_acc(grads[idx][0], dz.data(), x.data());
          for (size_t r = 0; r < dz.size(); ++r) grads[idx][1].data[r] += dz[r];
          if (!is_input(d.inputs[0]))
            detail::matvec_transposed_acc(params_[idx][0], dz.data(),
                                          dout[static_cast<size_t>(d.inputs[0])].data());
          break;
        }
        case LayerKind::dropout: {
          const auto& mask = tape.dropout_mask[idx];
          if (!is_input(d.inputs[0])) {
            auto& din = dout[static_cast<size_t>(d.inputs[0])];
            for (size_t e = 0; e < g_out.size(); ++e) din[e] += g_out[e] * mask[e];
          }
          break;
        }
        case LayerKind::concat: {
          size_t offset = 0;
          for (int in : d.inputs) {
            size_t w = static_cast<size_t>(nodes_[static_cast<size_t>(in)].width);
            if (!is_input(in)) {
              auto& din = dout[static_cast<size_t>(in)];
              for (size_t e = 0; e < w; ++e) din[e] += g_out[offset + e];
            }
            offset += w;
          }
          break;
        }
        case LayerKind::lstm:
          lstm_backward_node(static_cast<int>(idx), tape, g_out, grads);
          break;
      }
    }
  }

  double predict(const Sample& sample) const {
    Tape tape;
    return forward(sample, tape, /*training=*/false);
  }

  int predict_class(const Sample& sample) const { return predict(sample) > 0.5 ? 1 : 0; }

  std::vector<double> infer_node(const Sample& sample, int node) const {
    check_vector_node(node);
    Tape tape;
    forward(sample, tape, /*training=*/false);
    return tape.out[static_cast<size_t>(node)];
  }

 private:
  int add_node(NodeDesc d) {
    nodes_.push_back(std::move(d));
    params_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
  }

  void check_node(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
      fail(ErrorKind::invalid_config, "bad node id " + std::to_string(id));
  }

  void check_vector_node(int id) const {
    check_node(id);
    if (nodes_[static_cast<size_t>(id)].kind == LayerKind::input_seq)
      fail(ErrorKind::invalid_config, "node " + std::to_string(id) + " is not a vector node");
  }

  bool is_input(int id) const {
    auto k = nodes_[static_cast<size_t>(id)].kind;
    return k == LayerKind::input_seq || k == LayerKind::input_vec;
  }

  const Tensor2& input_tensor(const Sample& sample, int node_id) const {
    for (size_t k = 0; k < input_nodes_.size(); ++k)
      if (input_nodes_[k] == node_id) return sample.inputs[k];
    fail(ErrorKind::shape_error, "node is not an input");
  }

  static void glorot_fill(Tensor2& t, int fan_in, int fan_out, rng::Engine& eng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.data) v = eng.uniform(-limit, limit);
  }

  // Gate row layout in the stacked 4u parameter tensors: [input; forget;
  // candidate; output].
  void lstm_forward_node(int id, const Sample& sample, Tape& tape) const {
    const auto& d = nodes_[static_cast<size_t>(id)];
    const Tensor2& x = input_tensor(sample, d.inputs[0]);
    const size_t u = static_cast<size_t>(d.width);
    const size_t steps = x.cols;
    const size_t in_w = x.rows;
    const auto& wx = params_[static_cast<size_t>(id)][0];
    const auto& wh = params_[static_cast<size_t>(id)][1];
    const auto& b = params_[static_cast<size_t>(id)][2];

    auto& cache = tape.lstm[static_cast<size_t>(id)];
    cache.gi = Tensor2(u, steps);
    cache.gf = Tensor2(u, steps);
    cache.gg = Tensor2(u, steps);
    cache.go = Tensor2(u, steps);
    cache.c = Tensor2(u, steps);
    cache.tc = Tensor2(u, steps);
    cache.h = Tensor2(u, steps);

    std::vector<double> xt(in_w), h_prev(u, 0.0), c_prev(u, 0.0), pre(4 * u);
    for (size_t t = 0; t < steps; ++t) {
      for (size_t r = 0; r < in_w; ++r) xt[r] = x.at(r, t);
      for (size_t r = 0; r < 4 * u; ++r) pre[r] = b.data[r];
      detail::matvec(wx, xt.data(), pre.data(), true);
      detail::matvec(wh, h_prev.data(), pre.data(), true);
      for (size_t r = 0; r < u; ++r) {
        double gi = apply_activation(Activation::sigmoid, pre[r]);
        double gf = apply_activation(Activation::sigmoid, pre[u + r]);
        double gg = std::tanh(pre[2 * u + r]);
        double go = apply_activation(Activation::sigmoid, pre[3 * u + r]);
        double c = gf * c_prev[r] + gi * gg;
        double tc = std::tanh(c);
        double h = go * tc;
        cache.gi.at(r, t) = gi;
        cache.gf.at(r, t) = gf;
        cache.gg.at(r, t) = gg;
        cache.go.at(r, t) = go;
        cache.c.at(r, t) = c;
        cache.tc.at(r, t) = tc;
        cache.h.at(r, t) = h;
        h_prev[r] = h;
        c_prev[r] = c;
      }
    }
    auto& out = tape.out[static_cast<size_t>(id)];
    out.resize(u);
    for (size_t r = 0; r < u; ++r) out[r] = cache.h.at(r, steps - 1);
  }

  void lstm_backward_node(int id, const Tape& tape, const std::vector<double>& d_h_final,
                          ParamSet& grads) const {
    const auto& d = nodes_[static_cast<size_t>(id)];
    const auto& cache = tape.lstm[static_cast<size_t>(id)];
    const Tensor2& x = input_tensor(*tape.sample, d.inputs[0]);
    const size_t u = static_cast<size_t>(d.width);
    const size_t steps = x.cols;
    const size_t in_w = x.rows;
    const auto& wh = params_[static_cast<size_t>(id)][1];
    auto& d_wx = grads[static_cast<size_t>(id)][0];
    auto& d_wh = grads[static_cast<size_t>(id)][1];
    auto& d_b = grads[static_cast<size_t>(id)][2];

    std::vector<double> dh(d_h_final), dc(u, 0.0), dpre(4 * u), xt(in_w), h_prev(u);
    for (size_t t = steps; t-- > 0;) {
      for (size_t r = 0; r < u; ++r) {
        double go = cache.go.at(r, t);
        double tc = cache.tc.at(r, t);
        double d_go = dh[r] * tc;
        dc[r] += dh[r] * go * (1.0 - tc * tc);
        double gi = cache.gi.at(r, t);
        double gf = cache.gf.at(r, t);
        double gg = cache.gg.at(r, t);
        double c_prev = t > 0 ? cache.c.at(r, t - 1) : 0.0;
        double d_gi = dc[r] * gg;
        double d_gf = dc[r] * c_prev;
        double d_gg = dc[r] * gi;
        dpre[r] = d_gi * gi * (1.0 - gi);
        dpre[u + r] = d_gf * gf * (1.0 - gf);
        dpre[2 * u + r] = d_gg * (1.0 - gg * gg);
        dpre[3 * u + r] = d_go * go * (1.0 - go);
      }
      for (size_t r = 0; r < in_w; ++r) xt[r] = x.at(r, t);
      detail::outer_acc(d_wx, dpre.data(), xt.data());
      if (t > 0) {
        for (size_t r = 0; r < u; ++r) h_prev[r] = cache.h.at(r, t - 1);
        detail::outer_acc(d_wh, dpre.data(), h_prev.data());
      }
      for (size_t r = 0; r < 4 * u; ++r) d_b.data[r] += dpre[r];
      std::fill(dh.begin(), dh.end(), 0.0);
      detail::matvec_transposed_acc(wh, dpre.data(), dh.data());
      for (size_t r = 0; r < u; ++r) dc[r] *= cache.gf.at(r, t);
    }
  }

  std::vector<NodeDesc> nodes_;
  ParamSet params_;
  std::vector<int> input_nodes_;
  std::vector<std::string> input_tags_;
  int output_node_ = -1;
  int representation_node_ = -1;
  uint64_t seed_ = 0;
  bool trained_ = false;

  friend void save_checkpoint(const ModelGraph&, const std::string&);
  friend ModelGraph load_checkpoint(const std::string&);
};

// ---------------------------------------------------------------------------
// Standalone single-layer entry points (also used by the graph internally
// through the same math helpers).

// Runs a bare LSTM over a feature_rows x T sequence and returns the final
// hidden state. params = {Wx(4u x in), Wh(4u x u), b(4u x 1)}.
inline std::vector<double> lstm_forward(const std::vector<Tensor2>& params, const Tensor2& sequence) {
  if (params.size() != 3) fail(ErrorKind::shape_error, "lstm_forward: expected 3 parameter tensors");
  size_t u4 = params[0].rows;
  if (u4 % 4 != 0 || params[1].rows != u4 || params[2].rows != u4 ||
      params[1].cols != u4 / 4 || params[0].cols != sequence.rows)
    fail(ErrorKind::shape_error, "lstm_forward: inconsistent parameter shapes");
  ModelGraph g;
  int in = g.add_input_sequence("x", static_cast<int>(sequence.rows));
  int h = g.add_lstm("lstm", in, static_cast<int>(u4 / 4));
  int out = g.add_dense("out", h, 1, Activation::sigmoid);
  g.set_output(out);
  g.params()[static_cast<size_t>(h)] = params;
  Sample s;
  s.inputs.push_back(sequence);
  return g.infer_node(s, h);
}

inline std::vector<double> dense_forward(const Tensor2& w, const Tensor2& b, Activation act,
                                         const std::vector<double>& x) {
  if (w.cols != x.size() || b.rows != w.rows || b.cols != 1)
    fail(ErrorKind::shape_error, "dense_forward: shape mismatch");
  std::vector<double> out(w.rows);
  detail::matvec(w, x.data(), out.data(), false);
  for (size_t r = 0; r < out.size(); ++r) out[r] = apply_activation(act, out[r] + b.data[r]);
  return out;
}

// Inverted dropout: training mode zeroes entries with probability rate and
// scales survivors by 1/(1-rate); inference mode is the identity.
inline std::vector<double> dropout_apply(double rate, const std::vector<double>& x, bool training,
                                         uint64_t key) {
  if (rate < 0.0 || rate >= 1.0) fail(ErrorKind::invalid_input, "dropout rate must be in [0,1)");
  std::vector<double> out = x;
  if (!training || rate == 0.0) return out;
  double keep_scale = 1.0 / (1.0 - rate);
  for (size_t e = 0; e < x.size(); ++e) {
    double u = rng::counter_uniform(rng::mix(key, 0, e));
    out[e] = u < rate ? 0.0 : x[e] * keep_scale;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  ParamSet m, v;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
};

inline AdamState make_adam_state(const ModelGraph& g, double beta1 = 0.9, double beta2 = 0.999,
                                 double epsilon = 1e-8) {
  AdamState s;
  s.m = g.zero_like_params();
  s.v = g.zero_like_params();
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  return s;
}

inline void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads, double lr) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t n = 0; n < params.size(); ++n) {
    for (size_t t = 0; t < params[n].size(); ++t) {
      auto& p = params[n][t].data;
      auto& m = state.m[n][t].data;
      auto& v = state.v[n][t].data;
      const auto& g = grads[n][t].data;
      for (size_t i = 0; i < p.size(); ++i) {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  LossSpec loss;
  uint64_t shuffle_seed = 0;

  void validate() const {
    if (epochs < 1 || batch_size < 1 || learning_rate <= 0.0)
      fail(ErrorKind::invalid_config, "epochs/batch_size/learning_rate out of range");
  }
};

struct EpochStats {
  double loss = 0.0;
  double loss_pre = 0.0;
  double loss_reg = 0.0;
  double accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

namespace detail {

inline void seed_gradients(const LossSpec& spec, double p, double y,
                           const std::vector<double>& embedding,
                           const std::vector<double>& teacher, double& d_output,
                           std::vector<double>& d_repr) {
  // Gradient of the clamped BCE wrt the sigmoid output. Inside the clamp the
  // downstream sigmoid derivative cancels to the fused (p - y) form.
  if (p <= kProbClamp || p >= 1.0 - kProbClamp) {
    d_output = 0.0;
  } else {
    d_output = (p - y) / (p * (1.0 - p));
  }
  d_repr.clear();
  if (spec.beta > 0.0) {
    double m = static_cast<double>(embedding.size());
    d_repr.resize(embedding.size());
    for (size_t i = 0; i < embedding.size(); ++i) {
      double diff = embedding[i] - teacher[i];
      if (spec.reg == RegKind::mse)
        d_repr[i] = spec.beta * 2.0 * diff / m;
      else
        d_repr[i] = spec.beta * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / m;
    }
  }
}

inline void check_gradients_finite(const ModelGraph& g, const ParamSet& grads) {
  for (size_t n = 0; n < grads.size(); ++n)
    for (const auto& t : grads[n])
      for (double v : t.data)
        if (!std::isfinite(v))
          fail(ErrorKind::numerical_failure,
               "non-finite gradient in layer " + g.node(static_cast<int>(n)).name);
}

}  // namespace detail

inline TrainHistory train(ModelGraph& g, const std::vector<Sample>& data,
                          const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) fail(ErrorKind::invalid_input, "train: empty dataset");
  if (cfg.loss.beta > 0.0) {
    if (g.representation_node() < 0)
      fail(ErrorKind::state_error, "composite loss requires a representation node");
    size_t width = static_cast<size_t>(g.node(g.representation_node()).width);
    for (const auto& s : data)
      if (s.teacher.size() != width)
        fail(ErrorKind::invalid_input, "train: sample missing teacher vector of width " +
                                           std::to_string(width));
  }

  AdamState adam = make_adam_state(g, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
  TrainHistory history;
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  Tape tape;
  ParamSet grads = g.zero_like_params();
  const std::vector<double> kEmpty;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::Engine shuffler(rng::mix(cfg.shuffle_seed, static_cast<uint64_t>(epoch), 0x5f17ULL));
    shuffler.shuffle(order);

    EpochStats stats;
    size_t correct = 0;
    size_t n_batches = (data.size() + static_cast<size_t>(cfg.batch_size) - 1) /
                       static_cast<size_t>(cfg.batch_size);
    for (size_t batch = 0; batch < n_batches; ++batch) {
      size_t lo = batch * static_cast<size_t>(cfg.batch_size);
      size_t hi = std::min(data.size(), lo + static_cast<size_t>(cfg.batch_size));
      for (auto& tensors : grads)
        for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), 0.0);

      for (size_t pos = lo; pos < hi; ++pos) {
        const Sample& s = data[order[pos]];
        uint64_t key = rng::mix(cfg.shuffle_seed, static_cast<uint64_t>(epoch), batch,
                                static_cast<uint64_t>(order[pos]));
        double p = g.forward(s, tape, /*training=*/true, key);
        const std::vector<double>& embedding =
            cfg.loss.beta > 0.0 ? tape.out[static_cast<size_t>(g.representation_node())] : kEmpty;
        LossParts parts = compute_loss(cfg.loss, p, s.label, embedding,
                                       cfg.loss.beta > 0.0 ? s.teacher : kEmpty);
        stats.loss += parts.total;
        stats.loss_pre += parts.pre;
        stats.loss_reg += parts.reg;
        if ((p > 0.5 ? 1.0 : 0.0) == s.label) ++correct;

        double d_output = 0.0;
        std::vector<double> d_repr;
        detail::seed_gradients(cfg.loss, p, s.label, embedding, s.teacher, d_output, d_repr);
        g.backward(tape, d_output, d_repr, grads);
      }
      double inv = 1.0 / static_cast<double>(hi - lo);
      for (auto& tensors : grads)
        for (auto& t : tensors)
          for (auto& v : t.data) v *= inv;
      detail::check_gradients_finite(g, grads);
      adam_step(adam, g.params(), grads, cfg.learning_rate);
    }
    double n = static_cast<double>(data.size());
    stats.loss /= n;
    stats.loss_pre /= n;
    stats.loss_reg /= n;
    stats.accuracy = static_cast<double>(correct) / n;
    history.epochs.push_back(stats);
  }
  g.set_trained(true);
  return history;
}

// Mean loss over a sample set with dropout disabled; the target the
// finite-difference check differentiates.
inline double mean_loss(const ModelGraph& g, const std::vector<Sample>& data,
                        const LossSpec& spec) {
  if (spec.beta > 0.0 && g.representation_node() < 0)
    fail(ErrorKind::state_error, "composite loss requires a representation node");
  Tape tape;
  double total = 0.0;
  const std::vector<double> kEmpty;
  for (const auto& s : data) {
    double p = g.forward(s, tape, /*training=*/false);
    const std::vector<double>& e =
        spec.beta > 0.0 ? tape.out[static_cast<size_t>(g.representation_node())] : kEmpty;
    total += compute_loss(spec, p, s.label, e, spec.beta > 0.0 ? s.teacher : kEmpty).total;
  }
  return total / static_cast<double>(data.size());
}

// Central finite differences over every parameter; returns the max relative
// error against the analytic gradient. Dropout is bypassed in both paths.
inline double gradient_check(ModelGraph& g, const std::vector<Sample>& data, const LossSpec& spec,
                             double epsilon = 1e-5) {
  if (data.empty()) fail(ErrorKind::invalid_input, "gradient_check: empty sample set");
  if (spec.beta > 0.0 && g.representation_node() < 0)
    fail(ErrorKind::state_error, "composite loss requires a representation node");
  ParamSet grads = g.zero_like_params();
  Tape tape;
  const std::vector<double> kEmpty;
  for (const auto& s : data) {
    double p = g.forward(s, tape, /*training=*/false);
    const std::vector<double>& e =
        spec.beta > 0.0 ? tape.out[static_cast<size_t>(g.representation_node())] : kEmpty;
    double d_output = 0.0;
    std::vector<double> d_repr;
    detail::seed_gradients(spec, p, s.label, e, s.teacher, d_output, d_repr);
    g.backward(tape, d_output, d_repr, grads);
  }
  double inv = 1.0 / static_cast<double>(data.size());
  for (auto& tensors : grads)
    for (auto& t : tensors)
      for (auto& v : t.data) v *= inv;

  double max_rel = 0.0;
  for (size_t n = 0; n < g.params().size(); ++n) {
    for (size_t t = 0; t < g.params()[n].size(); ++t) {
      auto& tensor = g.params()[n][t];
      for (size_t i = 0; i < tensor.data.size(); ++i) {
        double saved = tensor.data[i];
        tensor.data[i] = saved + epsilon;
        double up = mean_loss(g, data, spec);
        tensor.data[i] = saved - epsilon;
        double down = mean_loss(g, data, spec);
        tensor.data[i] = saved;
        double numeric = (up - down) / (2.0 * epsilon);
        double analytic = grads[n][t].data[i];
        double rel = std::fabs(analytic - numeric) /
                     std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON with decimal-string tensor values (17 significant
// digits, bit-exact round trip).

inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(const ModelGraph& g, const std::string& path) {
  nlohmann::json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["seed"] = g.seed_;
  doc["trained"] = g.trained_;
  doc["output_node"] = g.output_node_;
  doc["representation_node"] = g.representation_node_;
  doc["input_tags"] = g.input_tags_;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& d : g.nodes_) {
    nlohmann::json n;
    n["kind"] = to_string(d.kind);
    n["name"] = d.name;
    n["inputs"] = d.inputs;
    n["width"] = d.width;
    n["activation"] = to_string(d.activation);
    n["rate"] = d.dropout_rate;
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::json params = nlohmann::json::array();
  for (size_t id = 0; id < g.params_.size(); ++id) {
    if (g.params_[id].empty()) continue;
    nlohmann::json entry;
    entry["node"] = id;
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : g.params_[id]) {
      nlohmann::json jt;
      jt["rows"] = t.rows;
      jt["cols"] = t.cols;
      nlohmann::json values = nlohmann::json::array();
      for (double v : t.data) values.push_back(csv::format_double(v));
      jt["values"] = std::move(values);
      tensors.push_back(std::move(jt));
    }
    entry["tensors"] = std::move(tensors);
    params.push_back(std::move(entry));
  }
  doc["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) fail(ErrorKind::missing_file, "cannot write " + path);
  out << doc.dump(1) << "\n";
}

inline ModelGraph load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::missing_file, path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::corrupt_file, path + ": " + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kCheckpointVersion)
      fail(ErrorKind::version_mismatch,
           "checkpoint version " + doc.at("format_version").dump() + " not supported");
    ModelGraph g;
    for (const auto& n : doc.at("nodes")) {
      LayerKind kind = layer_kind_from_string(n.at("kind").get<std::string>());
      std::string name = n.at("name").get<std::string>();
      std::vector<int> inputs = n.at("inputs").get<std::vector<int>>();
      int width = n.at("width").get<int>();
      Activation act = activation_from_string(n.at("activation").get<std::string>());
      double rate = n.at("rate").get<double>();
      switch (kind) {
        case LayerKind::input_seq: g.add_input_sequence(name, width); break;
        case LayerKind::input_vec: g.add_input_vector(name, width); break;
        case LayerKind::lstm: g.add_lstm(name, inputs.at(0), width); break;
        case LayerKind::dense: g.add_dense(name, inputs.at(0), width, act); break;
        case LayerKind::dropout: g.add_dropout(name, inputs.at(0), rate); break;
        case LayerKind::concat: g.add_concat(name, inputs); break;
      }
    }
    g.set_output(doc.at("output_node").get<int>());
    int repr = doc.at("representation_node").get<int>();
    if (repr >= 0) g.set_representation_node(repr);
    g.seed_ = doc.at("seed").get<uint64_t>();
    g.trained_ = doc.at("trained").get<bool>();
    if (doc.contains("input_tags")) g.input_tags_ = doc.at("input_tags").get<std::vector<std::string>>();
    for (const auto& entry : doc.at("params")) {
      size_t id = entry.at("node").get<size_t>();
      if (id >= g.params_.size()) fail(ErrorKind::corrupt_file, "params for unknown node");
      const auto& tensors = entry.at("tensors");
      if (tensors.size() != g.params_[id].size())
        fail(ErrorKind::corrupt_file, "tensor count mismatch for node " + std::to_string(id));
      for (size_t t = 0; t < g.params_[id].size(); ++t) {
        const auto& jt = tensors.at(t);
        size_t rows = jt.at("rows").get<size_t>();
        size_t cols = jt.at("cols").get<size_t>();
        if (rows != g.params_[id][t].rows || cols != g.params_[id][t].cols)
          fail(ErrorKind::corrupt_file, "tensor shape mismatch for node " + std::to_string(id));
        const auto& values = jt.at("values");
        if (values.size() != rows * cols)
          fail(ErrorKind::corrupt_file, "tensor value count mismatch");
        for (size_t i = 0; i < values.size(); ++i)
          g.params_[id][t].data[i] = csv::parse_number(values.at(i).get<std::string>(), path);
      }
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::corrupt_file, path + ": " + e.what());
  }
}

}  // namespace cyberseer::nnet
