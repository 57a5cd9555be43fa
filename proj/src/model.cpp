#include "srb/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srb/errors.hpp"

namespace srb {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0)
      throw std::invalid_argument(std::string("config: ") + name + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(embed_dim, "embed_dim");
  positive(hidden_dim, "hidden_dim");
  positive(encoder_layers, "encoder_layers");
  positive(decoder_layers, "decoder_layers");
  positive(gate_hidden_dim, "gate_hidden_dim");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw std::invalid_argument("config: dropout_rate must be in [0,1)");
  if (lambda_sr < 0.0)
    throw std::invalid_argument("config: lambda_sr must be non-negative");
}

bool ModelConfig::same_dims(const ModelConfig& other) const {
  return vocab_size == other.vocab_size && embed_dim == other.embed_dim &&
         hidden_dim == other.hidden_dim && encoder_layers == other.encoder_layers &&
         decoder_layers == other.decoder_layers &&
         gate_hidden_dim == other.gate_hidden_dim;
}

std::vector<Tensor> ModelParams::tensors() const {
  std::vector<Tensor> out;
  out.reserve(named_.size());
  for (const auto& [name, t] : named_) out.push_back(t);
  return out;
}

void ModelParams::build_registry() {
  named_.clear();
  named_.emplace_back("embedding", embedding);
  for (size_t l = 0; l < encoder.size(); ++l) {
    const std::string p = "encoder.l" + std::to_string(l) + ".";
    named_.emplace_back(p + "wx", encoder[l].wx);
    named_.emplace_back(p + "wh", encoder[l].wh);
    named_.emplace_back(p + "b", encoder[l].b);
  }
  for (size_t l = 0; l < decoder.size(); ++l) {
    const std::string p = "decoder.l" + std::to_string(l) + ".";
    named_.emplace_back(p + "wx", decoder[l].wx);
    named_.emplace_back(p + "wh", decoder[l].wh);
    named_.emplace_back(p + "b", decoder[l].b);
  }
  named_.emplace_back("gate.w1", gate_w1);
  named_.emplace_back("gate.b1", gate_b1);
  named_.emplace_back("gate.w2", gate_w2);
  named_.emplace_back("gate.b2", gate_b2);
  named_.emplace_back("combine.w", w_combine);
  named_.emplace_back("out.w", w_out);
}

namespace {

// Weights start on the float32 grid so that a fresh model and its first
// checkpoint hold identical values.
Tensor uniform_param(Rng& rng, Shape shape, double range) {
  std::vector<double> v(static_cast<size_t>(numel(shape)));
  for (double& x : v)
    x = static_cast<double>(static_cast<float>(rng.uniform(-range, range)));
  return tensor(std::move(shape), std::move(v), true);
}

Tensor lstm_bias(int hidden_dim) {
  std::vector<double> b(static_cast<size_t>(4) * hidden_dim, 0.0);
  for (int i = hidden_dim; i < 2 * hidden_dim; ++i) b[i] = 1.0;  // forget gate
  return tensor({4 * hidden_dim}, std::move(b), true);
}

}  // namespace

double ModelParams::init_bound(int fan_in, double scale) {
  return scale / std::sqrt(static_cast<double>(fan_in));
}

ModelParams ModelParams::init(const ModelConfig& config, uint64_t seed,
                              double scale) {
  config.validate();
  Rng rng(seed);
  const int h = config.hidden_dim;
  auto bound = [&](int fan_in) { return init_bound(fan_in, scale); };

  ModelParams p;
  p.config = config;
  p.embedding =
      uniform_param(rng, {config.vocab_size, config.embed_dim}, bound(config.embed_dim));
  for (int l = 0; l < config.encoder_layers; ++l) {
    const int in = l == 0 ? config.embed_dim : h;
    p.encoder.push_back({uniform_param(rng, {4 * h, in}, bound(in)),
                         uniform_param(rng, {4 * h, h}, bound(h)), lstm_bias(h)});
  }
  for (int l = 0; l < config.decoder_layers; ++l) {
    const int in = l == 0 ? config.embed_dim : h;
    p.decoder.push_back({uniform_param(rng, {4 * h, in}, bound(in)),
                         uniform_param(rng, {4 * h, h}, bound(h)), lstm_bias(h)});
  }
  p.gate_w1 = uniform_param(rng, {config.gate_hidden_dim, h}, bound(h));
  p.gate_b1 = zeros({config.gate_hidden_dim}, true);
  p.gate_w2 = uniform_param(rng, {1, config.gate_hidden_dim},
                            bound(config.gate_hidden_dim));
  p.gate_b2 = zeros({1}, true);
  p.w_combine = uniform_param(rng, {h, 2 * h}, bound(2 * h));
  p.w_out = uniform_param(rng, {config.vocab_size, h}, bound(h));
  p.build_registry();
  return p;
}

ModelParams ModelParams::zeros_like(const ModelConfig& config) {
  config.validate();
  const int h = config.hidden_dim;
  ModelParams p;
  p.config = config;
  p.embedding = zeros({config.vocab_size, config.embed_dim}, true);
  for (int l = 0; l < config.encoder_layers; ++l) {
    const int in = l == 0 ? config.embed_dim : h;
    p.encoder.push_back({zeros({4 * h, in}, true), zeros({4 * h, h}, true),
                         zeros({4 * h}, true)});
  }
  for (int l = 0; l < config.decoder_layers; ++l) {
    const int in = l == 0 ? config.embed_dim : h;
    p.decoder.push_back({zeros({4 * h, in}, true), zeros({4 * h, h}, true),
                         zeros({4 * h}, true)});
  }
  p.gate_w1 = zeros({config.gate_hidden_dim, h}, true);
  p.gate_b1 = zeros({config.gate_hidden_dim}, true);
  p.gate_w2 = zeros({1, config.gate_hidden_dim}, true);
  p.gate_b2 = zeros({1}, true);
  p.w_combine = zeros({h, 2 * h}, true);
  p.w_out = zeros({config.vocab_size, h}, true);
  p.build_registry();
  return p;
}

std::pair<Tensor, Tensor> SrbModel::lstm_step(Tape& tape, const Tensor& x,
                                              const Tensor& h_prev,
                                              const Tensor& c_prev,
                                              const LstmLayer& layer) {
  const int h = h_prev->shape[0];
  Tensor z = tape.add(tape.matmul(layer.wx, x),
                      tape.add(tape.matmul(layer.wh, h_prev), layer.b));
  Tensor gate_i = tape.sigmoid(tape.slice(z, 0, h));
  Tensor gate_f = tape.sigmoid(tape.slice(z, h, h));
  Tensor cand = tape.tanh(tape.slice(z, 2 * h, h));
  Tensor gate_o = tape.sigmoid(tape.slice(z, 3 * h, h));
  Tensor c = tape.add(tape.mul(gate_f, c_prev), tape.mul(gate_i, cand));
  Tensor h_out = tape.mul(gate_o, tape.tanh(c));
  return {h_out, c};
}

SrbModel::GateOut SrbModel::self_gate(Tape& tape, const Tensor& h_top,
                                      const Tensor* e_next) const {
  Tensor hidden = tape.tanh(
      tape.add(tape.matmul(params_.gate_w1, h_top), params_.gate_b1));
  Tensor score = tape.add(tape.matmul(params_.gate_w2, hidden), params_.gate_b2);
  GateOut out;
  out.beta = tape.sigmoid(score);
  out.gated_h = tape.scale_by(h_top, out.beta);
  if (e_next) out.gated_e = tape.scale_by(*e_next, out.beta);
  return out;
}

EncoderOutput SrbModel::encode(Tape& tape, std::span<const int> source_ids,
                               Rng* dropout_rng) const {
  if (source_ids.empty()) throw std::invalid_argument("encode: empty source");
  const ModelConfig& cfg = params_.config;
  const int n = static_cast<int>(source_ids.size());

  std::vector<Tensor> embeddings(n);
  for (int t = 0; t < n; ++t) embeddings[t] = tape.row(params_.embedding, source_ids[t]);

  std::vector<std::pair<Tensor, Tensor>> state(cfg.encoder_layers);
  for (auto& [h, c] : state) {
    h = zeros({cfg.hidden_dim});
    c = zeros({cfg.hidden_dim});
  }

  EncoderOutput out;
  Tensor gated_input = embeddings[0];  // no gate before the first step
  for (int t = 0; t < n; ++t) {
    Tensor x = gated_input;
    for (int l = 0; l < cfg.encoder_layers; ++l) {
      auto [h, c] = lstm_step(tape, x, state[l].first, state[l].second,
                              params_.encoder[l]);
      state[l] = {h, c};
      x = h;
      if (l + 1 < cfg.encoder_layers && dropout_rng && cfg.dropout_rate > 0)
        x = tape.dropout(x, cfg.dropout_rate, *dropout_rng);
    }
    const Tensor* e_next = t + 1 < n ? &embeddings[t + 1] : nullptr;
    GateOut gate = self_gate(tape, state.back().first, e_next);
    out.gate_values.push_back(gate.beta);
    out.gated_states.push_back(gate.gated_h);
    if (e_next) gated_input = gate.gated_e;
  }

  out.memory = tape.stack_rows(out.gated_states);
  out.source_vector = out.gated_states.back();
  out.final_states = state;
  return out;
}

std::pair<Tensor, Tensor> SrbModel::attend(Tape& tape, const Tensor& s_t,
                                           const EncoderOutput& enc,
                                           const std::vector<uint8_t>* mask) {
  if (enc.length() == 0) throw std::invalid_argument("attend: empty encoder output");
  Tensor scores = tape.matmul(enc.memory, s_t);
  Tensor alpha = mask ? tape.softmax_masked(scores, *mask) : tape.softmax(scores);
  Tensor context = tape.vecmat(alpha, enc.memory);
  return {context, alpha};
}

DecoderState SrbModel::initial_decoder_state(const EncoderOutput& enc) const {
  const ModelConfig& cfg = params_.config;
  DecoderState state;
  state.layers.resize(cfg.decoder_layers);
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    if (l < static_cast<int>(enc.final_states.size())) {
      state.layers[l] = enc.final_states[l];
    } else {
      state.layers[l] = {zeros({cfg.hidden_dim}), zeros({cfg.hidden_dim})};
    }
  }
  return state;
}

DecodeStep SrbModel::decode_step(Tape& tape, int y_prev_id,
                                 const DecoderState& state,
                                 const EncoderOutput& enc,
                                 Rng* dropout_rng) const {
  const ModelConfig& cfg = params_.config;
  if (y_prev_id < 0 || y_prev_id >= cfg.vocab_size)
    throw std::invalid_argument("decode_step: token id " +
                                std::to_string(y_prev_id) + " out of vocab");

  DecodeStep out;
  out.state = state;
  Tensor x = tape.row(params_.embedding, y_prev_id);
  for (int l = 0; l < cfg.decoder_layers; ++l) {
    auto [h, c] = lstm_step(tape, x, state.layers[l].first, state.layers[l].second,
                            params_.decoder[l]);
    out.state.layers[l] = {h, c};
    x = h;
    if (l + 1 < cfg.decoder_layers && dropout_rng && cfg.dropout_rate > 0)
      x = tape.dropout(x, cfg.dropout_rate, *dropout_rng);
  }

  Tensor s_t = out.state.layers.back().first;
  auto [context, alpha] = attend(tape, s_t, enc);
  Tensor combined = tape.tanh(
      tape.matmul(params_.w_combine, tape.concat(s_t, context)));
  out.distribution = tape.softmax(tape.matmul(params_.w_out, combined));
  out.attention = alpha;
  out.state.combined = combined;
  out.state.step = state.step + 1;
  return out;
}

std::pair<Tensor, Tensor> SrbModel::semantic_vectors(Tape& tape,
                                                     const EncoderOutput& enc,
                                                     const Tensor& last_combined) {
  if (!last_combined)
    throw std::invalid_argument("semantic_vectors: decoder produced no steps");
  return {enc.source_vector, tape.sub(last_combined, enc.source_vector)};
}

Tensor SrbModel::srb_loss(Tape& tape, const std::vector<Tensor>& distributions,
                          std::span<const int> target_ids, const Tensor& v_source,
                          const Tensor& v_target, double lambda) {
  if (distributions.size() != target_ids.size())
    throw std::invalid_argument(
        "srb_loss: " + std::to_string(distributions.size()) +
        " distributions vs " + std::to_string(target_ids.size()) + " targets");
  if (distributions.empty())
    throw std::invalid_argument("srb_loss: empty target");

  Tensor nll =
      tape.scale(tape.log(tape.pick(distributions[0], target_ids[0])), -1.0);
  for (size_t t = 1; t < distributions.size(); ++t)
    nll = tape.sub(nll, tape.log(tape.pick(distributions[t], target_ids[t])));
  if (lambda == 0.0) return nll;
  return tape.sub(nll, tape.scale(tape.cosine(v_source, v_target), lambda));
}

TeacherForward SrbModel::forward_teacher(Tape& tape,
                                         std::span<const int> source_ids,
                                         std::span<const int> target_ids,
                                         double lambda, Rng* dropout_rng) const {
  if (target_ids.size() < 2)
    throw std::invalid_argument("forward_teacher: target must be BOS/EOS wrapped");

  TeacherForward out;
  out.encoded = encode(tape, source_ids, dropout_rng);
  DecoderState state = initial_decoder_state(out.encoded);
  const size_t steps = target_ids.size() - 1;
  out.distributions.reserve(steps);
  for (size_t t = 0; t < steps; ++t) {
    DecodeStep step = decode_step(tape, target_ids[t], state, out.encoded, dropout_rng);
    out.distributions.push_back(step.distribution);
    state = std::move(step.state);
  }

  out.last_combined = state.combined;
  auto [v_s, v_t] = semantic_vectors(tape, out.encoded, state.combined);
  out.v_source = v_s;
  out.v_target = v_t;
  out.cos_value = cosine_value(v_s->value, v_t->value);
  out.nll = srb_loss(tape, out.distributions, target_ids.subspan(1), v_s, v_t, 0.0);
  out.loss = lambda == 0.0
                 ? out.nll
                 : tape.sub(out.nll, tape.scale(tape.cosine(v_s, v_t), lambda));
  return out;
}

double cosine_value(std::span<const double> u, std::span<const double> v) {
  double dot = 0, uu = 0, vv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

}  // namespace srb
