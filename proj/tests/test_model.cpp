#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "srb/checkpoint.hpp"
#include "srb/errors.hpp"
#include "srb/gradcheck.hpp"
#include "srb/model.hpp"
#include "srb/rng.hpp"
#include "srb/tensor.hpp"

using namespace srb;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.vocab_size = 20;
  c.embed_dim = 8;
  c.hidden_dim = 12;
  c.gate_hidden_dim = 16;
  c.encoder_layers = 2;
  c.decoder_layers = 2;
  return c;
}

void fill_zero(ModelParams& p) {
  for (const auto& [name, t] : p.named())
    std::fill(t->value.begin(), t->value.end(), 0.0);
}

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Independent transcription of the cell equations, gate packing i,f,g,o.
void lstm_oracle(const std::vector<double>& wx, const std::vector<double>& wh,
                 const std::vector<double>& b, const std::vector<double>& x,
                 const std::vector<double>& h_prev, const std::vector<double>& c_prev,
                 int hidden, int in, std::vector<double>& h_out,
                 std::vector<double>& c_out) {
  auto affine = [&](int row) {
    double acc = b[row];
    for (int k = 0; k < in; ++k) acc += wx[row * in + k] * x[k];
    for (int k = 0; k < hidden; ++k) acc += wh[row * hidden + k] * h_prev[k];
    return acc;
  };
  h_out.resize(hidden);
  c_out.resize(hidden);
  for (int j = 0; j < hidden; ++j) {
    const double gi = sigmoid_ref(affine(j));
    const double gf = sigmoid_ref(affine(hidden + j));
    const double gg = std::tanh(affine(2 * hidden + j));
    const double go = sigmoid_ref(affine(3 * hidden + j));
    c_out[j] = gf * c_prev[j] + gi * gg;
    h_out[j] = go * std::tanh(c_out[j]);
  }
}

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -1, double hi = 1) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("lstm_step with zero parameters") {
  const int h = 3;
  LstmLayer layer{zeros({4 * h, 2}), zeros({4 * h, h}), zeros({4 * h})};
  Tape tape;

  SUBCASE("zero cell state") {
    auto [h_out, c_out] =
        SrbModel::lstm_step(tape, zeros({2}), zeros({h}), zeros({h}), layer);
    for (double v : c_out->value) CHECK(v == 0.0);
    for (double v : h_out->value) CHECK(v == 0.0);
  }

  SUBCASE("carried cell state halves and squashes") {
    Tensor c_prev = tensor({h}, {0.4, -1.0, 2.0});
    auto [h_out, c_out] =
        SrbModel::lstm_step(tape, zeros({2}), zeros({h}), c_prev, layer);
    for (int j = 0; j < h; ++j) {
      CHECK(c_out->value[j] == doctest::Approx(0.5 * c_prev->value[j]));
      CHECK(h_out->value[j] ==
            doctest::Approx(0.5 * std::tanh(0.5 * c_prev->value[j])));
    }
  }
}

TEST_CASE("lstm_step matches a formula transcription oracle") {
  Rng rng(31);
  const int h = 3, in = 4;
  for (int trial = 0; trial < 10; ++trial) {
    LstmLayer layer{tensor({4 * h, in}, random_vec(rng, 4 * h * in)),
                    tensor({4 * h, h}, random_vec(rng, 4 * h * h)),
                    tensor({4 * h}, random_vec(rng, 4 * h))};
    std::vector<double> x = random_vec(rng, in);
    std::vector<double> h_prev = random_vec(rng, h);
    std::vector<double> c_prev = random_vec(rng, h);

    Tape tape;
    auto [h_out, c_out] = SrbModel::lstm_step(
        tape, tensor({in}, x), tensor({h}, h_prev), tensor({h}, c_prev), layer);

    std::vector<double> h_ref, c_ref;
    lstm_oracle(layer.wx->value, layer.wh->value, layer.b->value, x, h_prev,
                c_prev, h, in, h_ref, c_ref);
    for (int j = 0; j < h; ++j) {
      CHECK(h_out->value[j] == doctest::Approx(h_ref[j]).epsilon(1e-6));
      CHECK(c_out->value[j] == doctest::Approx(c_ref[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("self_gate with zero weights halves everything") {
  ModelConfig cfg = tiny_config();
  ModelParams params = ModelParams::init(cfg, 1);
  fill_zero(params);
  SrbModel model(std::move(params));

  Tape tape;
  Rng rng(3);
  Tensor h = tensor({cfg.hidden_dim}, random_vec(rng, cfg.hidden_dim));
  Tensor e = tensor({cfg.embed_dim}, random_vec(rng, cfg.embed_dim));
  auto gate = model.self_gate(tape, h, &e);
  CHECK(gate.beta->item() == 0.5);
  for (int j = 0; j < cfg.hidden_dim; ++j)
    CHECK(gate.gated_h->value[j] == doctest::Approx(0.5 * h->value[j]));
  for (int j = 0; j < cfg.embed_dim; ++j)
    CHECK(gate.gated_e->value[j] == doctest::Approx(0.5 * e->value[j]));
}

TEST_CASE("self_gate saturates with a large output bias") {
  ModelConfig cfg = tiny_config();
  ModelParams params = ModelParams::init(cfg, 1);
  fill_zero(params);
  params.gate_b2->value[0] = 20.0;
  SrbModel model(std::move(params));

  Tape tape;
  Rng rng(5);
  Tensor h = tensor({cfg.hidden_dim}, random_vec(rng, cfg.hidden_dim));
  auto gate = model.self_gate(tape, h, nullptr);
  CHECK(gate.beta->item() > 0.999999);
  for (int j = 0; j < cfg.hidden_dim; ++j)
    CHECK(gate.gated_h->value[j] == doctest::Approx(h->value[j]).epsilon(1e-5));
}

TEST_CASE("self_gate matches an independent network evaluation") {
  ModelConfig cfg = tiny_config();
  cfg.hidden_dim = 4;
  cfg.gate_hidden_dim = 5;
  ModelParams params = ModelParams::init(cfg, 77);
  SrbModel model(std::move(params));
  const ModelParams& p = model.params();

  Rng rng(6);
  std::vector<double> h = random_vec(rng, 4);

  // sigmoid(w2 tanh(w1 h + b1) + b2), evaluated independently
  std::vector<double> hidden(5, 0.0);
  for (int i = 0; i < 5; ++i) {
    double acc = p.gate_b1->value[i];
    for (int k = 0; k < 4; ++k) acc += p.gate_w1->value[i * 4 + k] * h[k];
    hidden[i] = std::tanh(acc);
  }
  double score = p.gate_b2->value[0];
  for (int i = 0; i < 5; ++i) score += p.gate_w2->value[i] * hidden[i];
  const double beta_ref = sigmoid_ref(score);

  Tape tape;
  auto gate = model.self_gate(tape, tensor({4}, h), nullptr);
  CHECK(gate.beta->item() == doctest::Approx(beta_ref).epsilon(1e-6));
}

TEST_CASE("encode length-1 source") {
  SrbModel model(ModelParams::init(tiny_config(), 9));
  Tape tape;
  std::vector<int> src{5};
  EncoderOutput enc = model.encode(tape, src);
  CHECK(enc.length() == 1);
  CHECK(enc.source_vector.get() == enc.gated_states[0].get());
}

TEST_CASE("encode with zero parameters gives beta exactly 0.5 and zero states") {
  ModelParams params = ModelParams::init(tiny_config(), 9);
  fill_zero(params);
  SrbModel model(std::move(params));
  Tape tape;
  std::vector<int> src{1, 2, 3, 4};
  EncoderOutput enc = model.encode(tape, src);
  for (const Tensor& beta : enc.gate_values) CHECK(beta->item() == 0.5);
  for (const Tensor& h : enc.gated_states)
    for (double v : h->value) CHECK(v == 0.0);
}

TEST_CASE("encode source vector equals the last gated state") {
  SrbModel model(ModelParams::init(tiny_config(), 10));
  Tape tape;
  std::vector<int> src{3, 7, 11};
  EncoderOutput enc = model.encode(tape, src);
  CHECK(enc.length() == 3);
  CHECK(enc.source_vector->value == enc.gated_states[2]->value);
  CHECK_THROWS_AS(model.encode(tape, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("encode gate values stay strictly inside (0,1)") {
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    SrbModel model(ModelParams::init(tiny_config(), rng.next_u64()));
    Tape tape;
    std::vector<int> src;
    for (int t = 0; t < 6; ++t) src.push_back(static_cast<int>(rng.below(20)));
    EncoderOutput enc = model.encode(tape, src);
    for (const Tensor& beta : enc.gate_values) {
      CHECK(beta->item() > 0.0);
      CHECK(beta->item() < 1.0);
    }
  }
}

TEST_CASE("attend on a single state and on identical states") {
  Tape tape;
  EncoderOutput enc;
  Tensor h1 = tensor({3}, {0.2, -0.5, 1.0});
  enc.gated_states = {h1};
  enc.memory = tape.stack_rows(enc.gated_states);
  enc.source_vector = h1;
  auto [ctx1, alpha1] = SrbModel::attend(tape, tensor({3}, {1, 1, 1}), enc);
  CHECK(alpha1->value == std::vector<double>{1.0});
  CHECK(ctx1->value == h1->value);

  EncoderOutput enc4;
  enc4.gated_states = {h1, h1, h1, h1};
  enc4.memory = tape.stack_rows(enc4.gated_states);
  enc4.source_vector = h1;
  auto [ctx, alpha] = SrbModel::attend(tape, tensor({3}, {0.3, 2.0, -1.0}), enc4);
  for (double a : alpha->value) CHECK(a == doctest::Approx(0.25).epsilon(1e-12));
  for (int j = 0; j < 3; ++j)
    CHECK(ctx->value[j] == doctest::Approx(h1->value[j]).epsilon(1e-12));
}

TEST_CASE("attend with scores (ln 3, 0) weights 3:1") {
  Tape tape;
  EncoderOutput enc;
  enc.gated_states = {tensor({1}, {std::log(3.0)}), tensor({1}, {0.0})};
  enc.memory = tape.stack_rows(enc.gated_states);
  enc.source_vector = enc.gated_states[1];
  auto [ctx, alpha] = SrbModel::attend(tape, tensor({1}, {1.0}), enc);
  CHECK(alpha->value[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(alpha->value[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("attend masks padded positions to exactly zero") {
  Tape tape;
  EncoderOutput enc;
  Rng rng(8);
  for (int i = 0; i < 5; ++i) enc.gated_states.push_back(tensor({2}, random_vec(rng, 2)));
  enc.memory = tape.stack_rows(enc.gated_states);
  enc.source_vector = enc.gated_states.back();
  std::vector<uint8_t> mask{1, 1, 1, 0, 0};
  auto [ctx, alpha] = SrbModel::attend(tape, tensor({2}, {0.4, -0.2}), enc, &mask);
  CHECK(alpha->value[3] == 0.0);
  CHECK(alpha->value[4] == 0.0);
  CHECK(alpha->value[0] + alpha->value[1] + alpha->value[2] ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("decode_step with zero output matrices is uniform") {
  ModelConfig cfg = tiny_config();
  ModelParams params = ModelParams::init(cfg, 17);
  std::fill(params.w_out->value.begin(), params.w_out->value.end(), 0.0);
  std::fill(params.w_combine->value.begin(), params.w_combine->value.end(), 0.0);
  SrbModel model(std::move(params));

  Tape tape;
  std::vector<int> src{2, 9, 4};
  EncoderOutput enc = model.encode(tape, src);
  DecodeStep step = model.decode_step(tape, 2, model.initial_decoder_state(enc), enc);
  for (double p : step.distribution->value)
    CHECK(p == doctest::Approx(1.0 / cfg.vocab_size).epsilon(1e-12));
}

TEST_CASE("decode_step distributions sum to one across steps") {
  SrbModel model(ModelParams::init(tiny_config(), 18));
  Tape tape;
  std::vector<int> src{1, 6, 2, 8};
  EncoderOutput enc = model.encode(tape, src);
  DecoderState state = model.initial_decoder_state(enc);
  for (int t = 0; t < 4; ++t) {
    DecodeStep step = model.decode_step(tape, t + 2, state, enc);
    double total = 0;
    for (double p : step.distribution->value) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(step.state.step == t + 1);
    state = step.state;
  }
  CHECK_THROWS_AS(model.decode_step(tape, 999, state, enc), std::invalid_argument);
}

TEST_CASE("decode_step forced logits [2,0,0,0,0]") {
  ModelConfig cfg;
  cfg.vocab_size = 5;
  cfg.embed_dim = 1;
  cfg.hidden_dim = 1;
  cfg.gate_hidden_dim = 1;
  cfg.encoder_layers = 1;
  cfg.decoder_layers = 1;
  ModelParams params = ModelParams::init(cfg, 0);
  fill_zero(params);
  // open input/candidate/output gates via biases so the decoder state is
  // a known nonzero constant
  params.decoder[0].b->value[0] = 20.0;      // input gate
  params.decoder[0].b->value[2] = 20.0;      // candidate
  params.decoder[0].b->value[3] = 20.0;      // output gate
  params.w_combine->value[0] = 1.0;          // s~ = tanh(s_t)

  SrbModel probe(params);
  Tape tape;
  std::vector<int> src{1};
  EncoderOutput enc = probe.encode(tape, src);
  DecodeStep step = probe.decode_step(tape, 2, probe.initial_decoder_state(enc), enc);
  const double combined = step.state.combined->value[0];
  CHECK(combined != 0.0);

  // scale the first output row so its logit is exactly 2
  params.w_out->value[0] = 2.0 / combined;
  SrbModel model(params);
  Tape tape2;
  EncoderOutput enc2 = model.encode(tape2, src);
  DecodeStep forced =
      model.decode_step(tape2, 2, model.initial_decoder_state(enc2), enc2);

  const double e2 = std::exp(2.0);
  CHECK(forced.distribution->value[0] ==
        doctest::Approx(e2 / (e2 + 4.0)).epsilon(1e-9));
  int argmax = 0;
  for (int i = 1; i < 5; ++i)
    if (forced.distribution->value[i] > forced.distribution->value[argmax]) argmax = i;
  CHECK(argmax == 0);
}

TEST_CASE("semantic_vectors subtraction and identity") {
  Tape tape;
  EncoderOutput enc;
  enc.source_vector = tensor({2}, {1, 2});
  auto [v_s, v_t] = SrbModel::semantic_vectors(tape, enc, tensor({2}, {3, 5}));
  CHECK(v_s->value == std::vector<double>{1, 2});
  CHECK(v_t->value == std::vector<double>{2, 3});

  // integer values: round trip is exact
  CHECK(v_s->value[0] + v_t->value[0] == 3.0);
  CHECK(v_s->value[1] + v_t->value[1] == 5.0);

  // s~ == h^: degenerate V_t, downstream cosine refuses
  auto [v_s2, v_t2] = SrbModel::semantic_vectors(tape, enc, tensor({2}, {1, 2}));
  CHECK_THROWS_AS(tape.cosine(v_s2, v_t2), NumericError);
}

TEST_CASE("semantic_vectors round trip within one ulp on model values") {
  // (s - h) + h == s is not an IEEE identity, so the algebraic invariant
  // V_s + V_t == s~_M is enforced to one ulp; V_s must be the last gated
  // state node itself, which is exact.
  SrbModel model(ModelParams::init(tiny_config(), 23));
  Tape tape;
  std::vector<int> src{4, 8, 15};
  std::vector<int> tgt{2, 9, 16, 3};
  TeacherForward fwd = model.forward_teacher(tape, src, tgt, 0.1);
  CHECK(fwd.v_source.get() == fwd.encoded.gated_states.back().get());
  for (int j = 0; j < tiny_config().hidden_dim; ++j) {
    const double got = fwd.v_source->value[j] + fwd.v_target->value[j];
    const double want = fwd.last_combined->value[j];
    // rounding of the subtraction scales with the largest participant
    const double scale = std::max({std::abs(fwd.v_source->value[j]),
                                   std::abs(fwd.v_target->value[j]),
                                   std::abs(want)});
    CHECK(std::abs(got - want) <=
          2 * std::numeric_limits<double>::epsilon() * scale);
  }
}

TEST_CASE("srb_loss values") {
  Tape tape;
  Tensor v_s = tensor({2}, {1, 0});
  Tensor v_t = tensor({2}, {1, 1});

  SUBCASE("lambda 0 reduces to the NLL") {
    std::vector<Tensor> dists{tensor({2}, {0.5, 0.5}), tensor({2}, {0.25, 0.75})};
    std::vector<int> tgt{0, 0};
    Tensor loss = SrbModel::srb_loss(tape, dists, tgt, v_s, v_t, 0.0);
    CHECK(loss->item() ==
          doctest::Approx(-(std::log(0.5) + std::log(0.25))).epsilon(1e-12));
    CHECK(loss->item() == doctest::Approx(2.0794).epsilon(1e-4));
  }

  SUBCASE("perfect predictions leave only the cosine term") {
    std::vector<Tensor> dists{tensor({2}, {1.0, 0.0})};
    std::vector<int> tgt{0};
    Tensor loss = SrbModel::srb_loss(tape, dists, tgt, v_s, v_t, 0.3);
    const double cos_ref = 1.0 / std::sqrt(2.0);
    CHECK(loss->item() == doctest::Approx(-0.3 * cos_ref).epsilon(1e-12));
  }

  SUBCASE("length mismatch throws") {
    std::vector<Tensor> dists{tensor({2}, {0.5, 0.5})};
    std::vector<int> tgt{0, 1};
    CHECK_THROWS_AS(SrbModel::srb_loss(tape, dists, tgt, v_s, v_t, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("srb_loss is strictly decreasing in lambda when cosine is positive") {
  std::vector<int> tgt{0, 1};
  double last = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.05, 0.1, 0.2}) {
    Tape tape;
    std::vector<Tensor> dists{tensor({2}, {0.5, 0.5}), tensor({2}, {0.25, 0.75})};
    Tensor v_s = tensor({2}, {1, 0.2});
    Tensor v_t = tensor({2}, {0.9, 0.4});
    Tensor loss = SrbModel::srb_loss(tape, dists, tgt, v_s, v_t, lambda);
    CHECK(loss->item() < last);
    last = loss->item();
  }
}

TEST_CASE("init_params determinism, bias layout and fan-in bounds") {
  ModelConfig cfg = tiny_config();
  ModelParams a = ModelParams::init(cfg, 42);
  ModelParams b = ModelParams::init(cfg, 42);
  ModelParams c = ModelParams::init(cfg, 43);

  bool all_equal = true, any_diff = false;
  for (size_t i = 0; i < a.named().size(); ++i) {
    if (a.named()[i].second->value != b.named()[i].second->value) all_equal = false;
    if (a.named()[i].second->value != c.named()[i].second->value) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);

  const int h = cfg.hidden_dim;
  for (const auto& [name, t] : a.named()) {
    if (name.ends_with(".b")) {
      for (int j = 0; j < 4 * h; ++j)
        CHECK(t->value[j] == (j >= h && j < 2 * h ? 1.0 : 0.0));
    } else if (name == "gate.b1" || name == "gate.b2") {
      for (double v : t->value) CHECK(v == 0.0);
    }
  }

  auto within = [](const Tensor& t, int fan_in) {
    const double bound = ModelParams::init_bound(fan_in);
    for (double v : t->value) {
      CHECK(v >= -bound);
      CHECK(v <= bound);
    }
  };
  within(a.embedding, cfg.embed_dim);
  within(a.encoder[0].wx, cfg.embed_dim);
  within(a.encoder[0].wh, h);
  within(a.encoder[1].wx, h);
  within(a.decoder[0].wx, cfg.embed_dim);
  within(a.gate_w1, h);
  within(a.gate_w2, cfg.gate_hidden_dim);
  within(a.w_combine, 2 * h);
  within(a.w_out, h);
}

TEST_CASE("full model gradient check, lambda 0.1") {
  // scale 2: at the training init scale the two contractive layers
  // leave ||V_s|| tiny and the cosine term's curvature beyond what any
  // finite-difference oracle resolves at tolerance.
  ModelConfig cfg = tiny_config();
  SrbModel model(ModelParams::init(cfg, 2024, 2.0));
  std::vector<std::vector<int>> src{{4, 7, 1, 9, 12}, {3, 3, 15, 2, 6}};
  std::vector<std::vector<int>> tgt{{2, 5, 8, 10, 3}, {2, 14, 6, 11, 3}};

  auto build = [&](Tape& tape) -> Tensor {
    Tensor total;
    for (size_t i = 0; i < src.size(); ++i) {
      TeacherForward fwd = model.forward_teacher(tape, src[i], tgt[i], 0.1);
      total = total ? tape.add(total, fwd.loss) : fwd.loss;
    }
    return tape.scale(total, 1.0 / static_cast<double>(src.size()));
  };

  auto report = gradient_check(build, model.params().named());
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("lambda 0 gradients equal a hand-built plain seq2seq NLL path") {
  ModelConfig cfg = tiny_config();
  SrbModel model(ModelParams::init(cfg, 321));
  std::vector<int> src{4, 7, 1, 9, 12};
  std::vector<int> tgt{2, 5, 8, 10, 3};

  zero_grad(std::span<const Tensor>(model.params().tensors()));
  {
    Tape tape;
    TeacherForward fwd = model.forward_teacher(tape, src, tgt, 0.0);
    tape.backward(fwd.loss);
  }
  std::vector<std::vector<double>> grads_srb;
  for (const auto& [name, t] : model.params().named()) grads_srb.push_back(t->grad);

  // independent plain attention seq2seq NLL, written out by hand
  zero_grad(std::span<const Tensor>(model.params().tensors()));
  {
    Tape tape;
    EncoderOutput enc = model.encode(tape, src);
    DecoderState state = model.initial_decoder_state(enc);
    Tensor nll;
    for (size_t t = 0; t + 1 < tgt.size(); ++t) {
      DecodeStep step = model.decode_step(tape, tgt[t], state, enc);
      Tensor neg_log =
          tape.scale(tape.log(tape.pick(step.distribution, tgt[t + 1])), -1.0);
      nll = nll ? tape.add(nll, neg_log) : neg_log;
      state = step.state;
    }
    tape.backward(nll);
  }
  size_t i = 0;
  for (const auto& [name, t] : model.params().named()) {
    CHECK(t->grad == grads_srb[i]);
    ++i;
  }
}

TEST_CASE("checkpoint round trip preserves values and bytes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "srb_ckpt_test";
  fs::create_directories(dir);

  ModelConfig cfg = tiny_config();
  ModelParams params = ModelParams::init(cfg, 99);
  const fs::path p1 = dir / "a.srb";
  const fs::path p2 = dir / "b.srb";
  save_checkpoint(p1.string(), params);

  ModelParams loaded = load_checkpoint(p1.string(), cfg);
  for (size_t i = 0; i < params.named().size(); ++i)
    CHECK(loaded.named()[i].second->value == params.named()[i].second->value);

  save_checkpoint(p2.string(), loaded);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string bytes1((std::istreambuf_iterator<char>(f1)), {});
  std::string bytes2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(bytes1 == bytes2);
  CHECK(!bytes1.empty());

  SUBCASE("dimension mismatch is rejected") {
    ModelConfig other = cfg;
    other.hidden_dim = 13;
    CHECK_THROWS_AS(load_checkpoint(p1.string(), other), DataError);
  }

  SUBCASE("bad magic is rejected") {
    const fs::path bad = dir / "bad.srb";
    std::ofstream out(bad, std::ios::binary);
    out << "NOPE1234";
    out.close();
    CHECK_THROWS_AS(load_checkpoint(bad.string()), DataError);
  }

  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  ModelConfig cfg = tiny_config();
  cfg.dropout_rate = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config();
  cfg.lambda_sr = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config();
  cfg.vocab_size = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
