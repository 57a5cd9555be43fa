#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "srb/config.hpp"
#include "srb/gradcheck.hpp"
#include "srb/metrics.hpp"
#include "srb/model.hpp"

namespace srb {

struct EpochStats {
  int epoch = 0;
  double mean_nll = 0;
  double mean_cos = 0;
  double mean_loss = 0;
  double dev_loss = 0;
  bool has_dev = false;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  std::string last_checkpoint;
  std::string best_checkpoint;  // empty without a dev set
  std::string vocab_path;
  std::string loss_log_path;
};

// Full training run: corpus load + profile filters, vocab build or
// load, seeded shuffling, teacher-forced batches, the combined
// NLL - lambda*cos loss, clipping, Adam, per-epoch checkpoints,
// dev-loss best tracking and early stopping. The loss log gets one
// tab-separated line per batch: epoch, batch, nll, cosine, loss.
TrainResult cmd_train(const RunConfig& config, std::ostream& out);

// Greedy-decodes the test records, applies UNK/NE recovery and scores
// against the targets. Writes the report file and prints the table.
EvalReport cmd_eval(const RunConfig& config, std::ostream& out);

// Miniature-model gradient check over the full combined loss (vocab 20,
// embed 8, hidden 12, gate 16, 2 examples). Refuses to run with
// dropout enabled. Returns the max relative error.
double cmd_gradcheck(const RunConfig& config, std::ostream& out);

// One decoded line per input line; blank lines pass through blank.
// Optionally dumps attention rows (one row per decode step, blocks
// separated by blank lines).
void cmd_generate(const RunConfig& config, std::ostream& out);

// Writes a toy corpus record file.
void cmd_make_toy(const RunConfig& config, std::ostream& out);

}  // namespace srb
