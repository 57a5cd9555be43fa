#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srb/vocab.hpp"

namespace srb {

// One corpus record: source and target text plus an optional extra
// field holding an LCSTS relevance score ("3") or an EW-SEW match label
// ("good", "partial:0.31"). On disk: one record per line, fields
// tab-separated, UTF-8.
struct Record {
  std::string source;
  std::string target;
  std::string extra;
};

std::vector<Record> read_records(const std::string& path);
void write_records(const std::string& path, const std::vector<Record>& records);

// Char mode splits into Unicode scalar values, drops whitespace and
// keeps ASCII alphanumeric runs together; word mode splits on
// whitespace after separating ASCII punctuation into its own tokens.
std::vector<std::string> tokenize(const std::string& text, Vocab::Mode mode);

// Per-token entity labels: "O" or one of PER/LOC/ORG/MISC. Runs of the
// same label form one entity.
using Tagger = std::function<std::vector<std::string>(const std::vector<std::string>&)>;

// Bundled stand-in: labels capitalized non-sentence-initial word runs
// as MISC. A real tagger can be plugged in via file_tagger.
std::vector<std::string> rule_tag_entities(const std::vector<std::string>& tokens);

// Reads one whitespace-separated label line per tagged sentence, in
// call order.
Tagger file_tagger(const std::string& path);

struct Anonymized {
  std::vector<std::string> tokens;  // entities replaced by NE@N symbols
  std::map<std::string, std::vector<std::string>> recovery;  // NE@N -> surface run
};

// The N-th distinct entity surface of type NE becomes NE@N.
Anonymized anonymize_entities(const std::vector<std::string>& tokens,
                              const Tagger& tagger);

// Splices original surface runs back over their NE@N symbols.
std::vector<std::string> recover_entities(
    const std::vector<std::string>& tokens,
    const std::map<std::string, std::vector<std::string>>& recovery);

// LCSTS rule: unscored records pass, scored ones need score >= 3.
// Scores outside 1..5 are a DataError.
std::vector<Record> filter_lcsts(const std::vector<Record>& records);

// EW-SEW rule: keep good matches; keep (good-)partial matches only with
// scaled score strictly above 0.45; drop bad and unclassified. Missing
// labels are a DataError.
std::vector<Record> select_ewsew(const std::vector<Record>& records);

struct TokenizedPair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

// Drops a pair when either side exceeds max_tokens (strictly).
std::vector<TokenizedPair> filter_length(const std::vector<TokenizedPair>& pairs,
                                         size_t max_tokens = 100);

struct Split {
  std::vector<Record> train;
  std::vector<Record> dev;
  std::vector<Record> test;
};

// Removes exact duplicates (whitespace-normalized source/target pair),
// then splits off dev=205 and test=100 by a seeded shuffle; the rest is
// the training set. Requires at least 306 distinct pairs.
Split split_pwkp(const std::vector<Record>& records, uint64_t seed);

// PWKP native layout: blank-line-separated groups, first line the
// complex sentence, following lines its simple sentences.
struct PwkpGroup {
  std::string complex_sentence;
  std::vector<std::string> simple_sentences;
};
std::vector<PwkpGroup> load_pwkp_groups(const std::string& path);

// Flattens 1-to-many groups into records: either one record with the
// simple sentences concatenated, or one record per simple sentence.
std::vector<Record> pwkp_flatten(const std::vector<PwkpGroup>& groups,
                                 bool concat_simple);

enum class ToyTask { Copy, Truncate, SynonymMap };
std::optional<ToyTask> parse_toy_task(const std::string& name);

// Random letter sequences (a..z, lengths 4..12). Copy repeats the
// source, truncate keeps the first half (rounded up), synonym-map
// applies a fixed letter rotation. Deterministic per seed.
std::vector<Record> make_toy_corpus(ToyTask task, int n, uint64_t seed);

struct Example {
  std::vector<int> source_ids;             // never empty
  std::vector<int> target_ids;             // BOS ... EOS
  std::vector<std::string> source_tokens;  // surface forms, pre-encoding
  std::vector<std::string> target_tokens;
  std::map<std::string, std::vector<std::string>> recovery;  // NE@N map
};

// Tokenizes, optionally anonymizes (word mode) and encodes one record.
Example encode_example(const Record& record, const Vocab& vocab, Vocab::Mode mode,
                       const Tagger* tagger = nullptr);

// Tokenized-and-tagged halves of an example, before any vocab exists.
struct PreparedPair {
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  std::map<std::string, std::vector<std::string>> recovery;
};
PreparedPair prepare_pair(const Record& record, Vocab::Mode mode,
                          const Tagger* tagger = nullptr);

// Id assignment for an already prepared pair; wraps the target.
Example encode_prepared(PreparedPair pair, const Vocab& vocab);

struct Batch {
  std::vector<std::vector<int>> source;          // padded with kPad
  std::vector<std::vector<int>> target;          // padded with kPad
  std::vector<std::vector<uint8_t>> source_mask; // 1 exactly on real tokens
  std::vector<std::vector<uint8_t>> target_mask;
  std::vector<int> source_len;
  std::vector<int> target_len;

  int size() const { return static_cast<int>(source.size()); }
  std::vector<int> unpadded_source(int i) const;
  std::vector<int> unpadded_target(int i) const;
};

// Fixed-size batches in input order; the last one may be short. Padding
// goes to each batch's own maximum length.
std::vector<Batch> batch_pad(const std::vector<Example>& examples, int batch_size);

}  // namespace srb
