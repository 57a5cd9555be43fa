#include "srb/decode.hpp"

#include <stdexcept>

namespace srb {

DecodeResult greedy_decode(const SrbModel& model, const Vocab& vocab,
                           std::span<const int> source_ids, int max_len) {
  if (source_ids.empty()) throw std::invalid_argument("decode: empty source");
  if (max_len < 1) throw std::invalid_argument("decode: max_len must be at least 1");

  Tape tape;
  EncoderOutput enc = model.encode(tape, source_ids);
  DecoderState state = model.initial_decoder_state(enc);

  DecodeResult result;
  int prev = Vocab::kBos;
  for (int t = 0; t < max_len; ++t) {
    DecodeStep step = model.decode_step(tape, prev, state, enc);
    const std::vector<double>& dist = step.distribution->value;
    int best = -1;
    for (int id = 0; id < static_cast<int>(dist.size()); ++id) {
      if (id == Vocab::kPad || id == Vocab::kBos) continue;
      if (best < 0 || dist[id] > dist[best]) best = id;  // first max wins ties
    }
    if (best == Vocab::kEos) {
      result.finished = true;
      break;
    }
    result.ids.push_back(best);
    result.tokens.push_back(vocab.token(best));
    result.attention.push_back(step.attention->value);
    state = std::move(step.state);
    prev = best;
  }
  return result;
}

namespace {

bool is_entity_symbol(const std::string& token) {
  const size_t at = token.find('@');
  if (at == std::string::npos || at == 0 || at + 1 >= token.size()) return false;
  const std::string type = token.substr(0, at);
  if (type != "PER" && type != "LOC" && type != "ORG" && type != "MISC")
    return false;
  for (size_t i = at + 1; i < token.size(); ++i)
    if (token[i] < '0' || token[i] > '9') return false;
  return true;
}

}  // namespace

std::vector<std::string> replace_unk(
    const DecodeResult& result, const std::vector<std::string>& source_tokens,
    const std::map<std::string, std::vector<std::string>>& recovery) {
  std::vector<std::string> out;
  out.reserve(result.tokens.size());
  for (size_t t = 0; t < result.tokens.size(); ++t) {
    std::string token = result.tokens[t];
    if (token == "<unk>") {
      if (t >= result.attention.size())
        throw std::invalid_argument("replace_unk: missing attention row for step " +
                                    std::to_string(t));
      const std::vector<double>& alpha = result.attention[t];
      size_t best = 0;
      for (size_t i = 1; i < alpha.size(); ++i)
        if (alpha[i] > alpha[best]) best = i;
      if (best < source_tokens.size()) token = source_tokens[best];
    }
    if (is_entity_symbol(token)) {
      auto it = recovery.find(token);
      if (it != recovery.end()) {
        std::string joined;
        for (size_t k = 0; k < it->second.size(); ++k) {
          if (k) joined += " ";
          joined += it->second[k];
        }
        token = joined;
      }
    }
    out.push_back(std::move(token));
  }
  return out;
}

}  // namespace srb
