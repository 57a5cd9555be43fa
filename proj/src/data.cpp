#include "srb/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "srb/errors.hpp"
#include "srb/rng.hpp"

namespace srb {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

// Length of the UTF-8 sequence starting at s[i]; throws on malformed input.
size_t utf8_len(const std::string& s, size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  size_t len = 0;
  if (b < 0x80) len = 1;
  else if ((b & 0xE0) == 0xC0) len = 2;
  else if ((b & 0xF0) == 0xE0) len = 3;
  else if ((b & 0xF8) == 0xF0) len = 4;
  else throw DataError("tokenize: malformed UTF-8 byte");
  if (i + len > s.size()) throw DataError("tokenize: truncated UTF-8 sequence");
  for (size_t k = 1; k < len; ++k)
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80)
      throw DataError("tokenize: malformed UTF-8 continuation");
  return len;
}

}  // namespace

std::vector<Record> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("records: cannot open " + path);
  std::vector<Record> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t t1 = line.find('\t');
    if (t1 == std::string::npos)
      throw DataError("records: " + path + ":" + std::to_string(line_no) +
                      " has no tab separator");
    const size_t t2 = line.find('\t', t1 + 1);
    Record r;
    r.source = line.substr(0, t1);
    if (t2 == std::string::npos) {
      r.target = line.substr(t1 + 1);
    } else {
      r.target = line.substr(t1 + 1, t2 - t1 - 1);
      r.extra = line.substr(t2 + 1);
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_records(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("records: cannot write " + path);
  for (const Record& r : records) {
    out << r.source << "\t" << r.target;
    if (!r.extra.empty()) out << "\t" << r.extra;
    out << "\n";
  }
}

std::vector<std::string> tokenize(const std::string& text, Vocab::Mode mode) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&]() {
    if (!word.empty()) {
      tokens.push_back(word);
      word.clear();
    }
  };

  if (mode == Vocab::Mode::Char) {
    size_t i = 0;
    while (i < text.size()) {
      const char c = text[i];
      if (static_cast<unsigned char>(c) < 0x80) {
        if (is_ascii_space(c)) {
          flush();
        } else if (is_ascii_alnum(c)) {
          word.push_back(c);  // alphanumeric runs stay one token
        } else {
          flush();
          tokens.emplace_back(1, c);
        }
        ++i;
      } else {
        flush();
        const size_t len = utf8_len(text, i);
        const std::string cp = text.substr(i, len);
        if (cp == "\xe3\x80\x80") {  // U+3000 ideographic space
          i += len;
          continue;
        }
        tokens.push_back(cp);
        i += len;
      }
    }
    flush();
  } else {
    size_t i = 0;
    while (i < text.size()) {
      const char c = text[i];
      if (static_cast<unsigned char>(c) < 0x80) {
        if (is_ascii_space(c)) {
          flush();
        } else if (is_ascii_punct(c)) {
          flush();
          tokens.emplace_back(1, c);
        } else {
          word.push_back(c);
        }
        ++i;
      } else {
        const size_t len = utf8_len(text, i);
        word.append(text, i, len);
        i += len;
      }
    }
    flush();
  }
  return tokens;
}

std::vector<std::string> rule_tag_entities(const std::vector<std::string>& tokens) {
  auto capitalized = [](const std::string& t) {
    return !t.empty() && t[0] >= 'A' && t[0] <= 'Z';
  };
  auto sentence_initial = [&](size_t i) {
    if (i == 0) return true;
    const std::string& prev = tokens[i - 1];
    return prev == "." || prev == "!" || prev == "?";
  };

  std::vector<std::string> labels(tokens.size(), "O");
  size_t i = 0;
  while (i < tokens.size()) {
    if (capitalized(tokens[i]) && !sentence_initial(i)) {
      size_t j = i;
      while (j < tokens.size() && capitalized(tokens[j])) ++j;
      for (size_t k = i; k < j; ++k) labels[k] = "MISC";
      i = j;
    } else {
      ++i;
    }
  }
  return labels;
}

Tagger file_tagger(const std::string& path) {
  auto lines = std::make_shared<std::vector<std::string>>();
  std::ifstream in(path);
  if (!in) throw DataError("tagger: cannot open " + path);
  std::string line;
  while (std::getline(in, line)) lines->push_back(line);
  auto next = std::make_shared<size_t>(0);

  return [lines, next, path](const std::vector<std::string>& tokens) {
    if (*next >= lines->size())
      throw DataError("tagger: " + path + " ran out of label lines");
    std::istringstream is((*lines)[(*next)++]);
    std::vector<std::string> labels;
    std::string label;
    while (is >> label) labels.push_back(label);
    if (labels.size() != tokens.size())
      throw DataError("tagger: " + path + " line " + std::to_string(*next) +
                      " has " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(tokens.size()) + " tokens");
    return labels;
  };
}

Anonymized anonymize_entities(const std::vector<std::string>& tokens,
                              const Tagger& tagger) {
  const std::vector<std::string> labels = tagger(tokens);
  if (labels.size() != tokens.size())
    throw DataError("anonymize: tagger returned wrong label count");

  Anonymized out;
  std::map<std::string, std::map<std::string, int>> seen;  // type -> surface -> N
  size_t i = 0;
  while (i < tokens.size()) {
    if (labels[i] == "O") {
      out.tokens.push_back(tokens[i]);
      ++i;
      continue;
    }
    const std::string type = labels[i];
    size_t j = i;
    while (j < tokens.size() && labels[j] == type) ++j;
    std::vector<std::string> run(tokens.begin() + i, tokens.begin() + j);
    std::string surface;
    for (size_t k = 0; k < run.size(); ++k) {
      if (k) surface += " ";
      surface += run[k];
    }
    auto& by_surface = seen[type];
    auto it = by_surface.find(surface);
    if (it == by_surface.end())
      it = by_surface.emplace(surface, static_cast<int>(by_surface.size()) + 1).first;
    const std::string symbol = type + "@" + std::to_string(it->second);
    out.tokens.push_back(symbol);
    out.recovery.emplace(symbol, std::move(run));
    i = j;
  }
  return out;
}

std::vector<std::string> recover_entities(
    const std::vector<std::string>& tokens,
    const std::map<std::string, std::vector<std::string>>& recovery) {
  std::vector<std::string> out;
  for (const std::string& t : tokens) {
    auto it = recovery.find(t);
    if (it == recovery.end()) {
      out.push_back(t);
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

std::vector<Record> filter_lcsts(const std::vector<Record>& records) {
  std::vector<Record> kept;
  for (const Record& r : records) {
    if (r.extra.empty()) {
      kept.push_back(r);  // PART I carries no score
      continue;
    }
    double score = 0;
    try {
      size_t consumed = 0;
      score = std::stod(r.extra, &consumed);
      if (consumed != r.extra.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError("lcsts: non-numeric score '" + r.extra + "'");
    }
    if (score < 1.0 || score > 5.0)
      throw DataError("lcsts: score " + r.extra + " outside 1..5");
    if (score >= 3.0) kept.push_back(r);
  }
  return kept;
}

std::vector<Record> select_ewsew(const std::vector<Record>& records) {
  std::vector<Record> kept;
  for (const Record& r : records) {
    if (r.extra.empty()) throw DataError("ewsew: record without a match label");
    std::string label = r.extra;
    std::optional<double> score;
    const size_t colon = r.extra.find(':');
    if (colon != std::string::npos) {
      label = r.extra.substr(0, colon);
      try {
        score = std::stod(r.extra.substr(colon + 1));
      } catch (const std::exception&) {
        throw DataError("ewsew: bad score in '" + r.extra + "'");
      }
    }
    if (label == "good") {
      kept.push_back(r);
    } else if (label == "good-partial" || label == "partial") {
      if (!score) throw DataError("ewsew: partial match without a score");
      if (*score > 0.45) kept.push_back(r);
    } else if (label == "bad" || label == "unclassified") {
      // dropped
    } else {
      throw DataError("ewsew: unknown match label '" + label + "'");
    }
  }
  return kept;
}

std::vector<TokenizedPair> filter_length(const std::vector<TokenizedPair>& pairs,
                                         size_t max_tokens) {
  std::vector<TokenizedPair> kept;
  for (const TokenizedPair& p : pairs)
    if (p.source.size() <= max_tokens && p.target.size() <= max_tokens)
      kept.push_back(p);
  return kept;
}

namespace {

std::string normalize_ws(const std::string& s) {
  std::string out;
  bool in_space = true;  // also trims leading whitespace
  for (char c : s) {
    if (is_ascii_space(c)) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

}  // namespace

Split split_pwkp(const std::vector<Record>& records, uint64_t seed) {
  std::vector<Record> unique;
  std::set<std::pair<std::string, std::string>> seen;
  for (const Record& r : records) {
    auto key = std::make_pair(normalize_ws(r.source), normalize_ws(r.target));
    if (seen.insert(std::move(key)).second) unique.push_back(r);
  }

  constexpr size_t kDev = 205, kTest = 100;
  if (unique.size() < kDev + kTest + 1)
    throw DataError("pwkp: need at least 306 distinct pairs, have " +
                    std::to_string(unique.size()));

  std::vector<size_t> order(unique.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<size_t> dev_idx(order.begin(), order.begin() + kDev);
  std::vector<size_t> test_idx(order.begin() + kDev, order.begin() + kDev + kTest);
  std::sort(dev_idx.begin(), dev_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  std::vector<bool> held(unique.size(), false);
  for (size_t i : dev_idx) held[i] = true;
  for (size_t i : test_idx) held[i] = true;

  Split split;
  for (size_t i : dev_idx) split.dev.push_back(unique[i]);
  for (size_t i : test_idx) split.test.push_back(unique[i]);
  for (size_t i = 0; i < unique.size(); ++i)
    if (!held[i]) split.train.push_back(unique[i]);
  return split;
}

std::vector<PwkpGroup> load_pwkp_groups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("pwkp: cannot open " + path);
  std::vector<PwkpGroup> groups;
  PwkpGroup current;
  bool open = false;
  std::string line;
  auto close = [&]() {
    if (open) {
      groups.push_back(std::move(current));
      current = {};
      open = false;
    }
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      close();
    } else if (!open) {
      current.complex_sentence = line;
      open = true;
    } else {
      current.simple_sentences.push_back(line);
    }
  }
  close();
  return groups;
}

std::vector<Record> pwkp_flatten(const std::vector<PwkpGroup>& groups,
                                 bool concat_simple) {
  std::vector<Record> records;
  for (const PwkpGroup& g : groups) {
    if (g.simple_sentences.empty()) continue;
    if (concat_simple) {
      std::string joined;
      for (size_t i = 0; i < g.simple_sentences.size(); ++i) {
        if (i) joined += " ";
        joined += g.simple_sentences[i];
      }
      records.push_back({g.complex_sentence, std::move(joined), ""});
    } else {
      for (const std::string& s : g.simple_sentences)
        records.push_back({g.complex_sentence, s, ""});
    }
  }
  return records;
}

std::optional<ToyTask> parse_toy_task(const std::string& name) {
  if (name == "copy") return ToyTask::Copy;
  if (name == "truncate") return ToyTask::Truncate;
  if (name == "synonym-map") return ToyTask::SynonymMap;
  return std::nullopt;
}

std::vector<Record> make_toy_corpus(ToyTask task, int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("toy corpus: n must be at least 1");
  Rng rng(seed);
  std::vector<Record> records;
  records.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int len = 4 + static_cast<int>(rng.below(9));  // 4..12
    std::vector<char> letters(len);
    for (char& c : letters) c = static_cast<char>('a' + rng.below(26));

    auto join = [](const std::vector<char>& cs, size_t count) {
      std::string s;
      for (size_t k = 0; k < count; ++k) {
        if (k) s += " ";
        s += cs[k];
      }
      return s;
    };

    std::string source = join(letters, letters.size());
    std::string target;
    switch (task) {
      case ToyTask::Copy:
        target = source;
        break;
      case ToyTask::Truncate:
        target = join(letters, (letters.size() + 1) / 2);
        break;
      case ToyTask::SynonymMap: {
        std::vector<char> mapped;
        mapped.reserve(letters.size());
        for (char c : letters)
          mapped.push_back(static_cast<char>('a' + (c - 'a' + 13) % 26));
        target = join(mapped, mapped.size());
        break;
      }
    }
    records.push_back({std::move(source), std::move(target), ""});
  }
  return records;
}

PreparedPair prepare_pair(const Record& record, Vocab::Mode mode,
                          const Tagger* tagger) {
  PreparedPair pair;
  pair.source_tokens = tokenize(record.source, mode);
  pair.target_tokens = tokenize(record.target, mode);
  if (pair.source_tokens.empty())
    throw DataError("example: empty source after tokenization");
  if (pair.target_tokens.empty())
    throw DataError("example: empty target after tokenization");

  if (tagger) {
    Anonymized src = anonymize_entities(pair.source_tokens, *tagger);
    Anonymized tgt = anonymize_entities(pair.target_tokens, *tagger);
    pair.source_tokens = std::move(src.tokens);
    pair.target_tokens = std::move(tgt.tokens);
    pair.recovery = std::move(src.recovery);
    for (auto& [symbol, run] : tgt.recovery) pair.recovery.emplace(symbol, run);
  }
  return pair;
}

Example encode_prepared(PreparedPair pair, const Vocab& vocab) {
  Example ex;
  ex.source_ids = vocab.encode(pair.source_tokens);
  ex.target_ids.push_back(Vocab::kBos);
  for (int id : vocab.encode(pair.target_tokens)) ex.target_ids.push_back(id);
  ex.target_ids.push_back(Vocab::kEos);
  ex.source_tokens = std::move(pair.source_tokens);
  ex.target_tokens = std::move(pair.target_tokens);
  ex.recovery = std::move(pair.recovery);
  return ex;
}

Example encode_example(const Record& record, const Vocab& vocab, Vocab::Mode mode,
                       const Tagger* tagger) {
  return encode_prepared(prepare_pair(record, mode, tagger), vocab);
}

std::vector<int> Batch::unpadded_source(int i) const {
  return {source[i].begin(), source[i].begin() + source_len[i]};
}

std::vector<int> Batch::unpadded_target(int i) const {
  return {target[i].begin(), target[i].begin() + target_len[i]};
}

std::vector<Batch> batch_pad(const std::vector<Example>& examples, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch_pad: batch_size must be positive");
  std::vector<Batch> batches;
  for (size_t start = 0; start < examples.size(); start += batch_size) {
    const size_t end = std::min(examples.size(), start + batch_size);
    Batch b;
    size_t max_src = 0, max_tgt = 0;
    for (size_t i = start; i < end; ++i) {
      max_src = std::max(max_src, examples[i].source_ids.size());
      max_tgt = std::max(max_tgt, examples[i].target_ids.size());
    }
    for (size_t i = start; i < end; ++i) {
      const Example& ex = examples[i];
      std::vector<int> src(max_src, Vocab::kPad);
      std::vector<int> tgt(max_tgt, Vocab::kPad);
      std::vector<uint8_t> src_mask(max_src, 0), tgt_mask(max_tgt, 0);
      std::copy(ex.source_ids.begin(), ex.source_ids.end(), src.begin());
      std::copy(ex.target_ids.begin(), ex.target_ids.end(), tgt.begin());
      std::fill(src_mask.begin(), src_mask.begin() + ex.source_ids.size(), 1);
      std::fill(tgt_mask.begin(), tgt_mask.begin() + ex.target_ids.size(), 1);
      b.source.push_back(std::move(src));
      b.target.push_back(std::move(tgt));
      b.source_mask.push_back(std::move(src_mask));
      b.target_mask.push_back(std::move(tgt_mask));
      b.source_len.push_back(static_cast<int>(ex.source_ids.size()));
      b.target_len.push_back(static_cast<int>(ex.target_ids.size()));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace srb
