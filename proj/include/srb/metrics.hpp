#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "srb/vocab.hpp"

namespace srb {

using Tokens = std::vector<std::string>;

// Clipped n-gram overlap F1: P over candidate n-grams, R over reference
// n-grams, 0 when either side has none.
double rouge_n(const Tokens& candidate, const Tokens& reference, int n);

// LCS-based F1: P = LCS/|candidate|, R = LCS/|reference|.
double rouge_l(const Tokens& candidate, const Tokens& reference);

// Corpus-level BLEU with n = 1..max_n clipped precisions (multi-
// reference clipping takes the max reference count), brevity penalty
// against the closest reference length (ties prefer the shorter), and
// +1/+1 smoothing for n >= 2 only where a precision would be zero.
double bleu(const std::vector<Tokens>& candidates,
            const std::vector<std::vector<Tokens>>& references, int max_n = 4);

struct RougeCounts {
  int64_t match1 = 0, cand1 = 0, ref1 = 0;
  int64_t match2 = 0, cand2 = 0, ref2 = 0;
  int64_t lcs = 0, cand_len = 0, ref_len = 0;
};

struct BleuCounts {
  std::array<int64_t, 4> match{};
  std::array<int64_t, 4> total{};
  int64_t cand_len = 0;
  int64_t ref_len = 0;
};

// Scores plus every count needed to recompute them. ROUGE F-scores are
// macro-averaged per example (multi-reference: best reference per
// metric); BLEU is corpus-level.
struct EvalReport {
  double rouge1_f = 0, rouge2_f = 0, rougeL_f = 0, bleu = 0;
  std::vector<RougeCounts> per_example;
  BleuCounts bleu_counts;

  struct Scores {
    double rouge1_f, rouge2_f, rougeL_f, bleu;
  };
  Scores recompute() const;
};

EvalReport evaluate_corpus(const std::vector<Tokens>& candidates,
                           const std::vector<std::vector<Tokens>>& references);

// Line-aligned files: one decoded sentence per line, each reference
// file contributing one reference per line. Lines are tokenized per
// mode. Misaligned line counts are a DataError.
EvalReport evaluate_files(const std::string& decoded_path,
                          const std::vector<std::string>& reference_paths,
                          Vocab::Mode mode);

// Named-field text file with per-example count lines.
void write_report(const std::string& path, const EvalReport& report);
// Human-readable table, scores scaled to 0..100 with two decimals.
void print_report(std::ostream& os, const EvalReport& report);

}  // namespace srb
