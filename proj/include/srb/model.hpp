#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srb/rng.hpp"
#include "srb/tensor.hpp"

namespace srb {

struct ModelConfig {
  int vocab_size = 0;
  int embed_dim = 0;
  int hidden_dim = 0;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int gate_hidden_dim = 0;
  double dropout_rate = 0.0;
  double lambda_sr = 1e-4;

  void validate() const;  // throws std::invalid_argument
  bool same_dims(const ModelConfig& other) const;
};

struct LstmLayer {
  Tensor wx;  // [4H, in]
  Tensor wh;  // [4H, H]
  Tensor b;   // [4H], gate order i,f,g,o
};

// Every trainable weight, named. The registry order is fixed by
// construction and defines the checkpoint layout.
struct ModelParams {
  ModelConfig config;
  Tensor embedding;  // [V, E]
  std::vector<LstmLayer> encoder;
  std::vector<LstmLayer> decoder;
  Tensor gate_w1;  // [G, H]
  Tensor gate_b1;  // [G]
  Tensor gate_w2;  // [1, G]
  Tensor gate_b2;  // [1]
  Tensor w_combine;  // [H, 2H]
  Tensor w_out;      // [V, H]

  const std::vector<std::pair<std::string, Tensor>>& named() const { return named_; }
  std::vector<Tensor> tensors() const;

  // Fan-in-scaled uniform weights: each matrix or embedding row draws
  // from uniform(-b, b) with b = scale / sqrt(fan_in), so forward
  // signal magnitudes stay usable across widths (a fixed range starves
  // small models and saturates none). Biases zero, forget-gate bias +1.
  // Values land on the float32 grid so checkpoints round-trip exactly.
  // Gradient checks pass a larger scale so activations are well-
  // conditioned for finite differences.
  static ModelParams init(const ModelConfig& config, uint64_t seed,
                          double scale = 1.0);
  static double init_bound(int fan_in, double scale = 1.0);
  // Shapes only; values zero. Used by the checkpoint loader.
  static ModelParams zeros_like(const ModelConfig& config);

 private:
  std::vector<std::pair<std::string, Tensor>> named_;
  void build_registry();
};

struct EncoderOutput {
  std::vector<Tensor> gated_states;  // h^_1..h^_N
  std::vector<Tensor> gate_values;   // beta_1..beta_N, scalars in (0,1)
  Tensor memory;                     // gated states stacked, [N, H]
  Tensor source_vector;              // V_s = h^_N
  std::vector<std::pair<Tensor, Tensor>> final_states;  // per-layer (h, c)

  int length() const { return static_cast<int>(gated_states.size()); }
};

struct DecoderState {
  std::vector<std::pair<Tensor, Tensor>> layers;  // per-layer (h, c)
  Tensor combined;                                // s~_t, null before step 1
  int step = 0;
};

struct DecodeStep {
  Tensor distribution;  // [V], sums to 1
  Tensor attention;     // [N]
  DecoderState state;
};

// Per-example forward pass under teacher forcing.
struct TeacherForward {
  EncoderOutput encoded;
  std::vector<Tensor> distributions;  // one per predicted token
  Tensor last_combined;               // s~_M at the final target position
  Tensor v_source;
  Tensor v_target;
  Tensor nll;        // scalar, sum of -log p over target tokens
  Tensor loss;       // nll - lambda * cos(V_s, V_t); == nll when lambda == 0
  double cos_value;  // cosine for logging; 0 when degenerate and lambda == 0
};

class SrbModel {
 public:
  explicit SrbModel(ModelParams params) : params_(std::move(params)) {}

  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  const ModelConfig& config() const { return params_.config; }

  // One LSTM cell: i,f,o sigmoid gates, tanh candidate,
  // c = f*c_prev + i*g, h = o*tanh(c).
  static std::pair<Tensor, Tensor> lstm_step(Tape& tape, const Tensor& x,
                                             const Tensor& h_prev,
                                             const Tensor& c_prev,
                                             const LstmLayer& layer);

  // beta = sigmoid(g(h)) with g a one-hidden-layer tanh network; returns
  // beta, beta*h and (when e_next is given) beta*e_next.
  struct GateOut {
    Tensor beta;
    Tensor gated_h;
    Tensor gated_e;  // null when e_next was null
  };
  GateOut self_gate(Tape& tape, const Tensor& h_top, const Tensor* e_next) const;

  // Runs the self-gated encoder stack over the source. dropout_rng null
  // disables dropout (evaluation, gradient checks).
  EncoderOutput encode(Tape& tape, std::span<const int> source_ids,
                       Rng* dropout_rng = nullptr) const;

  // Dot-product attention over the gated encoder states. mask, when
  // given, zeroes padded positions exactly.
  static std::pair<Tensor, Tensor> attend(Tape& tape, const Tensor& s_t,
                                          const EncoderOutput& enc,
                                          const std::vector<uint8_t>* mask = nullptr);

  DecoderState initial_decoder_state(const EncoderOutput& enc) const;

  DecodeStep decode_step(Tape& tape, int y_prev_id, const DecoderState& state,
                         const EncoderOutput& enc, Rng* dropout_rng = nullptr) const;

  // V_s = h^_N and V_t = s~_M - h^_N.
  static std::pair<Tensor, Tensor> semantic_vectors(Tape& tape,
                                                    const EncoderOutput& enc,
                                                    const Tensor& last_combined);

  // NLL of the target tokens minus lambda * cos(V_s, V_t). One
  // distribution per target token; the cosine node is built only when
  // lambda != 0 so the lambda == 0 graph is exactly the plain
  // attention seq2seq loss.
  static Tensor srb_loss(Tape& tape, const std::vector<Tensor>& distributions,
                         std::span<const int> target_ids, const Tensor& v_source,
                         const Tensor& v_target, double lambda);

  // Teacher-forced forward for one example. target_ids must be wrapped
  // in BOS/EOS; predictions cover target_ids[1..].
  TeacherForward forward_teacher(Tape& tape, std::span<const int> source_ids,
                                 std::span<const int> target_ids, double lambda,
                                 Rng* dropout_rng = nullptr) const;

 private:
  ModelParams params_;
};

// Value-level cosine for logging; returns 0 on degenerate vectors.
double cosine_value(std::span<const double> u, std::span<const double> v);

}  // namespace srb
