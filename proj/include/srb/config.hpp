#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srb/model.hpp"
#include "srb/vocab.hpp"

namespace srb {

// Everything a run needs: task profile, model dimensions, optimizer and
// loop settings, file paths. Built from profile defaults, then a
// key = value config file, then --key=value flags (flags win). Unknown
// keys are rejected.
struct RunConfig {
  std::string profile = "toy";  // summarization | simplification | toy

  ModelConfig model;

  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  double init_scale = 1.0;  // multiplies the 1/sqrt(fan_in) init bound

  int batch_size = 16;
  int max_epochs = 500;
  uint64_t seed = 1;
  bool shuffle = true;
  int eval_every = 1;
  int early_stop_patience = 5;
  double stop_train_nll = 0.0;  // 0 disables the early target

  std::string tokenize_mode = "word";  // char | word
  bool anonymize = false;
  int max_pair_tokens = 0;  // 0 disables the training length filter
  int max_decode_len = 0;   // 0 uses the profile rule

  std::string train_file;
  std::string dev_file;
  std::string test_file;
  std::string vocab_file;
  std::string label_file;  // external entity labels, one line per sentence
  std::string checkpoint_dir = "checkpoints";
  std::string checkpoint;
  std::string input_file;
  std::string output_file = "output.txt";
  std::string attention_file;
  std::string report_file = "eval_report.txt";

  std::string toy_task = "copy";
  int toy_size = 200;

  Vocab::Mode mode() const;
  // Decode length cap: explicit max_decode_len, else 30 for
  // summarization and ceil(1.5 x source length) otherwise.
  int decode_cap(int source_len) const;
  // Full key = value echo in a fixed order.
  std::string echo() const;
  void validate() const;  // throws UsageError
};

// config_path may be empty (profile defaults + flags only). Overrides
// are "key=value" strings, applied after the file.
RunConfig make_config(const std::string& config_path,
                      const std::vector<std::string>& overrides);

}  // namespace srb
