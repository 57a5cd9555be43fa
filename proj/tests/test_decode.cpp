#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srb/decode.hpp"
#include "srb/errors.hpp"
#include "srb/model.hpp"
#include "srb/vocab.hpp"

using namespace srb;

namespace {

Vocab seven_vocab() {
  // specials + t4 t5 t6
  return Vocab::build({{"t4", "t5", "t6"}}, 7, Vocab::Mode::Char);
}

// Zero model except: decoder layer-1 biases open the input/candidate/
// output gates, the embedding is a scaled identity, and W routes each
// token to its successor. Forces one-hot-ish distributions along
// BOS -> t4 -> t5 -> t6 -> EOS.
SrbModel successor_model() {
  ModelConfig cfg;
  cfg.vocab_size = 7;
  cfg.embed_dim = 7;
  cfg.hidden_dim = 7;
  cfg.gate_hidden_dim = 2;
  cfg.encoder_layers = 1;
  cfg.decoder_layers = 1;
  ModelParams p = ModelParams::init(cfg, 0);
  for (const auto& [name, t] : p.named())
    std::fill(t->value.begin(), t->value.end(), 0.0);

  const int h = cfg.hidden_dim;
  for (int i = 0; i < cfg.vocab_size; ++i)
    p.embedding->value[i * cfg.embed_dim + i] = 20.0;
  for (int j = 0; j < h; ++j) {
    p.decoder[0].b->value[j] = 20.0;                    // input gate open
    p.decoder[0].b->value[3 * h + j] = 20.0;            // output gate open
    p.decoder[0].wx->value[(2 * h + j) * cfg.embed_dim + j] = 1.0;  // candidate
  }
  // s~ = tanh(Wc [s;c]) with Wc = [I | 0]
  for (int j = 0; j < h; ++j) p.w_combine->value[j * 2 * h + j] = 20.0;
  // successor map on logits
  auto route = [&](int from, int to) { p.w_out->value[to * h + from] = 20.0; };
  route(Vocab::kBos, 4);
  route(4, 5);
  route(5, 6);
  route(6, Vocab::kEos);
  return SrbModel(std::move(p));
}

}  // namespace

TEST_CASE("forced successor params emit the exact sequence") {
  SrbModel model = successor_model();
  Vocab v = seven_vocab();
  std::vector<int> src{4, 5};
  DecodeResult r = greedy_decode(model, v, src, 10);
  CHECK(r.ids == std::vector<int>{4, 5, 6});
  CHECK(r.tokens == std::vector<std::string>{"t4", "t5", "t6"});
  CHECK(r.finished);
  CHECK(r.attention.size() == r.ids.size());
  for (const auto& row : r.attention) {
    double total = 0;
    for (double a : row) total += a;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("EOS forced at the first step gives an empty finished decode") {
  SrbModel model = successor_model();
  // reroute BOS straight to EOS
  auto& p = model.params();
  p.w_out->value[4 * 7 + Vocab::kBos] = 0.0;
  p.w_out->value[Vocab::kEos * 7 + Vocab::kBos] = 20.0;

  std::vector<int> src{4, 5};
  DecodeResult r = greedy_decode(model, seven_vocab(), src, 5);
  CHECK(r.ids.empty());
  CHECK(r.tokens.empty());
  CHECK(r.finished);
}

TEST_CASE("uniform distributions tie-break to the lowest allowed id") {
  // all-zero params give a uniform distribution; PAD and BOS are
  // excluded, so the argmax is UNK at id 1
  ModelConfig cfg;
  cfg.vocab_size = 7;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 5;
  cfg.gate_hidden_dim = 3;
  cfg.encoder_layers = 2;
  cfg.decoder_layers = 2;
  ModelParams p = ModelParams::init(cfg, 0);
  for (const auto& [name, t] : p.named())
    std::fill(t->value.begin(), t->value.end(), 0.0);
  SrbModel model(std::move(p));

  std::vector<int> src{1, 2};
  DecodeResult r = greedy_decode(model, seven_vocab(), src, 5);
  CHECK(r.ids == std::vector<int>(5, Vocab::kUnk));
  CHECK(!r.finished);
}

TEST_CASE("max_len caps an unfinished decode") {
  SrbModel model = successor_model();
  // route 6 back to 4 so the cycle never reaches EOS
  auto& p = model.params();
  p.w_out->value[Vocab::kEos * 7 + 6] = 0.0;
  p.w_out->value[4 * 7 + 6] = 20.0;

  std::vector<int> src{4};
  DecodeResult r = greedy_decode(model, seven_vocab(), src, 5);
  CHECK(r.ids.size() == 5);
  CHECK(!r.finished);
}

TEST_CASE("greedy decode is deterministic and never emits PAD/BOS/EOS") {
  SrbModel model(ModelParams::init(
      {.vocab_size = 15, .embed_dim = 6, .hidden_dim = 8, .encoder_layers = 2,
       .decoder_layers = 2, .gate_hidden_dim = 4},
      77));
  Vocab v = Vocab::build(
      {{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k"}}, 15,
      Vocab::Mode::Char);
  std::vector<int> src{4, 9, 6, 5};
  DecodeResult r1 = greedy_decode(model, v, src, 12);
  DecodeResult r2 = greedy_decode(model, v, src, 12);
  CHECK(r1.ids == r2.ids);
  for (int id : r1.ids) {
    CHECK(id != Vocab::kPad);
    CHECK(id != Vocab::kBos);
    CHECK(id != Vocab::kEos);
  }
  CHECK(r1.tokens.size() == r1.ids.size());
  CHECK_THROWS_AS(greedy_decode(model, v, std::vector<int>{}, 5),
                  std::invalid_argument);
}

TEST_CASE("replace_unk substitutes the attention argmax source token") {
  DecodeResult r;
  r.ids = {4, Vocab::kUnk, 5};
  r.tokens = {"hello", "<unk>", "world"};
  r.attention = {{0.5, 0.3, 0.1, 0.05, 0.05},
                 {0.05, 0.1, 0.05, 0.1, 0.7},
                 {0.2, 0.2, 0.2, 0.2, 0.2}};
  std::vector<std::string> src{"s0", "s1", "s2", "s3", "s4"};

  auto out = replace_unk(r, src, {});
  CHECK(out == std::vector<std::string>{"hello", "s4", "world"});

  SUBCASE("no UNK leaves output untouched") {
    r.tokens[1] = "fine";
    CHECK(replace_unk(r, src, {}) ==
          std::vector<std::string>{"hello", "fine", "world"});
  }

  SUBCASE("missing attention row throws") {
    r.attention.resize(1);
    CHECK_THROWS_AS(replace_unk(r, src, {}), std::invalid_argument);
  }
}

TEST_CASE("replace_unk restores entity symbols from the recovery map") {
  DecodeResult r;
  r.ids = {4, 5};
  r.tokens = {"PER@1", "said"};
  r.attention = {{1.0}, {1.0}};
  std::map<std::string, std::vector<std::string>> recovery{
      {"PER@1", {"Charles", "Darwin"}}};
  auto out = replace_unk(r, {"x"}, recovery);
  CHECK(out == std::vector<std::string>{"Charles Darwin", "said"});
  CHECK(out.size() == r.ids.size());  // length preserved

  // unknown symbols without a map entry stay as they are
  r.tokens = {"LOC@3", "said"};
  CHECK(replace_unk(r, {"x"}, recovery) ==
        std::vector<std::string>{"LOC@3", "said"});
}

TEST_CASE("replace_unk routes attention-picked entity through recovery") {
  DecodeResult r;
  r.ids = {Vocab::kUnk};
  r.tokens = {"<unk>"};
  r.attention = {{0.1, 0.9}};
  std::map<std::string, std::vector<std::string>> recovery{{"ORG@1", {"Acme"}}};
  auto out = replace_unk(r, {"the", "ORG@1"}, recovery);
  CHECK(out == std::vector<std::string>{"Acme"});
}
