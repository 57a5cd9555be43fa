#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "srb/model.hpp"
#include "srb/vocab.hpp"

namespace srb {

struct DecodeResult {
  std::vector<int> ids;                         // emitted tokens, no EOS
  std::vector<std::string> tokens;              // vocab surfaces for ids
  std::vector<std::vector<double>> attention;   // one row per emitted token
  bool finished = false;                        // EOS reached before max_len
};

// Greedy argmax decoding from BOS. PAD and BOS are never emitted; ties
// resolve to the lowest token id; stops at EOS or after max_len tokens.
// Dropout is off.
DecodeResult greedy_decode(const SrbModel& model, const Vocab& vocab,
                           std::span<const int> source_ids, int max_len);

// UNK tokens take the source token under the attention argmax for their
// step; NE@N symbols are restored from the recovery map (multi-token
// surfaces join with spaces so the sequence length never changes).
std::vector<std::string> replace_unk(
    const DecodeResult& result, const std::vector<std::string>& source_tokens,
    const std::map<std::string, std::vector<std::string>>& recovery);

}  // namespace srb
