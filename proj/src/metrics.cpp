#include "srb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "srb/data.hpp"
#include "srb/errors.hpp"

namespace srb {

namespace {

std::map<std::vector<std::string>, int64_t> ngram_counts(const Tokens& tokens,
                                                         int n) {
  std::map<std::vector<std::string>, int64_t> counts;
  if (static_cast<int>(tokens.size()) >= n) {
    for (size_t i = 0; i + n <= tokens.size(); ++i)
      ++counts[{tokens.begin() + i, tokens.begin() + i + n}];
  }
  return counts;
}

int64_t num_ngrams(const Tokens& tokens, int n) {
  return static_cast<int>(tokens.size()) >= n
             ? static_cast<int64_t>(tokens.size()) - n + 1
             : 0;
}

int64_t clipped_matches(const Tokens& candidate, const Tokens& reference, int n) {
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  int64_t matches = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

int64_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<int64_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double f_score(int64_t match, int64_t cand_total, int64_t ref_total) {
  if (cand_total == 0 || ref_total == 0) return 0.0;
  const double precision = static_cast<double>(match) / static_cast<double>(cand_total);
  const double recall = static_cast<double>(match) / static_cast<double>(ref_total);
  if (precision + recall == 0.0) return 0.0;
  return 2 * precision * recall / (precision + recall);
}

double bleu_from_counts(const BleuCounts& c) {
  if (c.cand_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    double p;
    if (c.match[n] > 0) {
      p = static_cast<double>(c.match[n]) / static_cast<double>(c.total[n]);
    } else if (n == 0) {
      return 0.0;  // no unigram overlap anywhere
    } else {
      p = static_cast<double>(c.match[n] + 1) / static_cast<double>(c.total[n] + 1);
    }
    log_sum += std::log(p);
  }
  const double bp = c.cand_len >= c.ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(c.ref_len) /
                                             static_cast<double>(c.cand_len));
  return bp * std::exp(log_sum / 4.0);
}

// Closest reference length; ties prefer the shorter reference.
int64_t effective_ref_len(int64_t cand_len, const std::vector<Tokens>& refs) {
  int64_t best = static_cast<int64_t>(refs[0].size());
  for (const Tokens& r : refs) {
    const auto len = static_cast<int64_t>(r.size());
    const int64_t d = std::abs(len - cand_len), db = std::abs(best - cand_len);
    if (d < db || (d == db && len < best)) best = len;
  }
  return best;
}

RougeCounts rouge_counts(const Tokens& candidate, const Tokens& reference) {
  RougeCounts rc;
  rc.match1 = clipped_matches(candidate, reference, 1);
  rc.cand1 = num_ngrams(candidate, 1);
  rc.ref1 = num_ngrams(reference, 1);
  rc.match2 = clipped_matches(candidate, reference, 2);
  rc.cand2 = num_ngrams(candidate, 2);
  rc.ref2 = num_ngrams(reference, 2);
  rc.lcs = lcs_length(candidate, reference);
  rc.cand_len = static_cast<int64_t>(candidate.size());
  rc.ref_len = static_cast<int64_t>(reference.size());
  return rc;
}

}  // namespace

double rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be at least 1");
  return f_score(clipped_matches(candidate, reference, n),
                 num_ngrams(candidate, n), num_ngrams(reference, n));
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  return f_score(lcs_length(candidate, reference),
                 static_cast<int64_t>(candidate.size()),
                 static_cast<int64_t>(reference.size()));
}

double bleu(const std::vector<Tokens>& candidates,
            const std::vector<std::vector<Tokens>>& references, int max_n) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("bleu: " + std::to_string(candidates.size()) +
                                " candidates vs " +
                                std::to_string(references.size()) +
                                " reference sets");
  if (max_n != 4) throw std::invalid_argument("bleu: only max_n == 4 is supported");

  BleuCounts counts;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const Tokens& cand = candidates[i];
    const std::vector<Tokens>& refs = references[i];
    if (refs.empty()) throw std::invalid_argument("bleu: empty reference set");
    for (int n = 1; n <= 4; ++n) {
      counts.total[n - 1] += num_ngrams(cand, n);
      const auto cand_grams = ngram_counts(cand, n);
      for (const auto& [gram, count] : cand_grams) {
        int64_t best_ref = 0;
        for (const Tokens& r : refs) {
          const auto ref_grams = ngram_counts(r, n);
          auto it = ref_grams.find(gram);
          if (it != ref_grams.end()) best_ref = std::max(best_ref, it->second);
        }
        counts.match[n - 1] += std::min(count, best_ref);
      }
    }
    counts.cand_len += static_cast<int64_t>(cand.size());
    counts.ref_len += effective_ref_len(static_cast<int64_t>(cand.size()), refs);
  }
  return bleu_from_counts(counts);
}

EvalReport::Scores EvalReport::recompute() const {
  Scores s{0, 0, 0, 0};
  for (const RougeCounts& rc : per_example) {
    s.rouge1_f += f_score(rc.match1, rc.cand1, rc.ref1);
    s.rouge2_f += f_score(rc.match2, rc.cand2, rc.ref2);
    s.rougeL_f += f_score(rc.lcs, rc.cand_len, rc.ref_len);
  }
  if (!per_example.empty()) {
    const auto n = static_cast<double>(per_example.size());
    s.rouge1_f /= n;
    s.rouge2_f /= n;
    s.rougeL_f /= n;
  }
  s.bleu = bleu_from_counts(bleu_counts);
  return s;
}

EvalReport evaluate_corpus(const std::vector<Tokens>& candidates,
                           const std::vector<std::vector<Tokens>>& references) {
  if (candidates.size() != references.size())
    throw DataError("evaluate: " + std::to_string(candidates.size()) +
                    " candidates vs " + std::to_string(references.size()) +
                    " reference sets");

  EvalReport report;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const Tokens& cand = candidates[i];
    const std::vector<Tokens>& refs = references[i];
    if (refs.empty()) throw DataError("evaluate: empty reference set");

    // best reference per metric; stored counts are the winner's
    RougeCounts best = rouge_counts(cand, refs[0]);
    for (size_t r = 1; r < refs.size(); ++r) {
      const RougeCounts rc = rouge_counts(cand, refs[r]);
      RougeCounts merged = best;
      if (f_score(rc.match1, rc.cand1, rc.ref1) >
          f_score(best.match1, best.cand1, best.ref1)) {
        merged.match1 = rc.match1;
        merged.cand1 = rc.cand1;
        merged.ref1 = rc.ref1;
      }
      if (f_score(rc.match2, rc.cand2, rc.ref2) >
          f_score(best.match2, best.cand2, best.ref2)) {
        merged.match2 = rc.match2;
        merged.cand2 = rc.cand2;
        merged.ref2 = rc.ref2;
      }
      if (f_score(rc.lcs, rc.cand_len, rc.ref_len) >
          f_score(best.lcs, best.cand_len, best.ref_len)) {
        merged.lcs = rc.lcs;
        merged.cand_len = rc.cand_len;
        merged.ref_len = rc.ref_len;
      }
      best = merged;
    }
    report.per_example.push_back(best);

    for (int n = 1; n <= 4; ++n) {
      report.bleu_counts.total[n - 1] += num_ngrams(cand, n);
      const auto cand_grams = ngram_counts(cand, n);
      for (const auto& [gram, count] : cand_grams) {
        int64_t best_ref = 0;
        for (const Tokens& r : refs) {
          const auto ref_grams = ngram_counts(r, n);
          auto it = ref_grams.find(gram);
          if (it != ref_grams.end()) best_ref = std::max(best_ref, it->second);
        }
        report.bleu_counts.match[n - 1] += std::min(count, best_ref);
      }
    }
    report.bleu_counts.cand_len += static_cast<int64_t>(cand.size());
    report.bleu_counts.ref_len +=
        effective_ref_len(static_cast<int64_t>(cand.size()), refs);
  }

  const EvalReport::Scores scores = report.recompute();
  report.rouge1_f = scores.rouge1_f;
  report.rouge2_f = scores.rouge2_f;
  report.rougeL_f = scores.rougeL_f;
  report.bleu = scores.bleu;
  return report;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("evaluate: cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

EvalReport evaluate_files(const std::string& decoded_path,
                          const std::vector<std::string>& reference_paths,
                          Vocab::Mode mode) {
  if (reference_paths.empty())
    throw DataError("evaluate: no reference files given");
  const std::vector<std::string> decoded = read_lines(decoded_path);
  std::vector<std::vector<std::string>> ref_lines;
  for (const std::string& path : reference_paths) {
    ref_lines.push_back(read_lines(path));
    if (ref_lines.back().size() != decoded.size())
      throw DataError("evaluate: " + path + " has " +
                      std::to_string(ref_lines.back().size()) + " lines, " +
                      decoded_path + " has " + std::to_string(decoded.size()));
  }

  std::vector<Tokens> candidates;
  std::vector<std::vector<Tokens>> references;
  for (size_t i = 0; i < decoded.size(); ++i) {
    candidates.push_back(tokenize(decoded[i], mode));
    std::vector<Tokens> refs;
    for (const auto& lines : ref_lines) refs.push_back(tokenize(lines[i], mode));
    references.push_back(std::move(refs));
  }
  return evaluate_corpus(candidates, references);
}

void write_report(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("report: cannot write " + path);
  char buf[64];
  auto field = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << name << "\t" << buf << "\n";
  };
  field("rouge1_f", report.rouge1_f);
  field("rouge2_f", report.rouge2_f);
  field("rougeL_f", report.rougeL_f);
  field("bleu", report.bleu);
  out << "bleu_counts";
  for (int n = 0; n < 4; ++n)
    out << "\t" << report.bleu_counts.match[n] << "\t" << report.bleu_counts.total[n];
  out << "\t" << report.bleu_counts.cand_len << "\t" << report.bleu_counts.ref_len
      << "\n";
  for (size_t i = 0; i < report.per_example.size(); ++i) {
    const RougeCounts& rc = report.per_example[i];
    out << "example\t" << i << "\t" << rc.match1 << "\t" << rc.cand1 << "\t"
        << rc.ref1 << "\t" << rc.match2 << "\t" << rc.cand2 << "\t" << rc.ref2
        << "\t" << rc.lcs << "\t" << rc.cand_len << "\t" << rc.ref_len << "\n";
  }
}

void print_report(std::ostream& os, const EvalReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "ROUGE-1 %6.2f\nROUGE-2 %6.2f\nROUGE-L %6.2f\nBLEU    %6.2f\n",
                100 * report.rouge1_f, 100 * report.rouge2_f,
                100 * report.rougeL_f, 100 * report.bleu);
  os << buf;
}

}  // namespace srb
