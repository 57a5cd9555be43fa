#include "srb/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "srb/errors.hpp"

namespace srb {

namespace {
const char* kSpecials[Vocab::kNumSpecials] = {"<pad>", "<unk>", "<s>", "</s>"};
}

const std::vector<std::string>& Vocab::entity_symbols() {
  static const std::vector<std::string> symbols = [] {
    std::vector<std::string> out;
    for (const char* type : {"PER", "LOC", "ORG", "MISC"})
      for (int n = 1; n <= kMaxEntityIndex; ++n)
        out.push_back(std::string(type) + "@" + std::to_string(n));
    return out;
  }();
  return symbols;
}

void Vocab::add(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& texts,
                   int max_size, Mode mode) {
  Vocab v;
  for (const char* s : kSpecials) v.add(s);
  if (mode == Mode::Word)
    for (const std::string& s : entity_symbols()) v.add(s);

  if (max_size < v.size())
    throw std::invalid_argument("vocab: max_size " + std::to_string(max_size) +
                                " is smaller than the " +
                                std::to_string(v.size()) + " reserved symbols");

  // frequency with first-occurrence order for ties
  std::unordered_map<std::string, int64_t> freq;
  std::unordered_map<std::string, int64_t> first_seen;
  int64_t position = 0;
  for (const auto& text : texts) {
    for (const std::string& tok : text) {
      if (v.index_.count(tok)) continue;  // reserved symbols keep their slot
      auto [it, fresh] = first_seen.emplace(tok, position++);
      (void)it;
      if (fresh) freq.emplace(tok, 0);
      ++freq[tok];
    }
  }

  std::vector<std::string> candidates;
  candidates.reserve(freq.size());
  for (const auto& [tok, count] : freq) candidates.push_back(tok);
  std::sort(candidates.begin(), candidates.end(),
            [&](const std::string& a, const std::string& b) {
              if (freq[a] != freq[b]) return freq[a] > freq[b];
              return first_seen[a] < first_seen[b];
            });

  for (const std::string& tok : candidates) {
    if (v.size() >= max_size) break;
    v.add(tok);
  }
  return v;
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size())
    throw std::invalid_argument("vocab: id " + std::to_string(id) +
                                " out of range [0," + std::to_string(size()) + ")");
  return tokens_[id];
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("vocab: cannot write " + path);
  for (const std::string& t : tokens_) out << t << "\n";
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("vocab: cannot open " + path);
  Vocab v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    v.add(line);
  }
  for (int i = 0; i < kNumSpecials; ++i)
    if (v.size() <= i || v.tokens_[i] != kSpecials[i])
      throw DataError("vocab: " + path + " does not start with the reserved symbols");
  return v;
}

}  // namespace srb
