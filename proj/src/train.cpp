#include "srb/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "srb/checkpoint.hpp"
#include "srb/data.hpp"
#include "srb/decode.hpp"
#include "srb/errors.hpp"
#include "srb/optim.hpp"
#include "srb/rng.hpp"

namespace srb {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Profile-specific corpus rules. Labeled records only appear in
// simplification corpora (EW-SEW); PWKP records carry no extra field.
std::vector<Record> apply_corpus_rules(std::vector<Record> records,
                                       const RunConfig& config) {
  if (config.profile == "summarization") return filter_lcsts(records);
  if (config.profile == "simplification") {
    const bool labeled = std::any_of(records.begin(), records.end(),
                                     [](const Record& r) { return !r.extra.empty(); });
    if (labeled) return select_ewsew(records);
  }
  return records;
}

struct LoadedCorpus {
  std::vector<PreparedPair> pairs;
};

LoadedCorpus load_corpus(const std::string& path, const RunConfig& config,
                         const Tagger* tagger, bool training_split) {
  LoadedCorpus corpus;
  std::vector<Record> records = apply_corpus_rules(read_records(path), config);
  for (const Record& r : records)
    corpus.pairs.push_back(prepare_pair(r, config.mode(), tagger));

  if (training_split && config.max_pair_tokens > 0) {
    std::vector<PreparedPair> kept;
    for (PreparedPair& p : corpus.pairs) {
      const size_t cap = static_cast<size_t>(config.max_pair_tokens);
      if (p.source_tokens.size() <= cap && p.target_tokens.size() <= cap)
        kept.push_back(std::move(p));
    }
    corpus.pairs = std::move(kept);
  }
  if (corpus.pairs.empty()) throw DataError("corpus: " + path + " left no examples");
  return corpus;
}

std::vector<Example> encode_corpus(const LoadedCorpus& corpus, const Vocab& vocab) {
  std::vector<Example> examples;
  examples.reserve(corpus.pairs.size());
  for (const PreparedPair& p : corpus.pairs)
    examples.push_back(encode_prepared(p, vocab));
  return examples;
}

// Distinct per-purpose RNG streams derived from the run seed, so e.g.
// a lambda change cannot shift the shuffle or dropout sequences.
Rng shuffle_stream(uint64_t seed) { return Rng(seed * 0x9e3779b97f4a7c15ULL + 1); }
Rng dropout_stream(uint64_t seed) { return Rng(seed * 0x9e3779b97f4a7c15ULL + 2); }

double dev_mean_loss(const SrbModel& model, const std::vector<Example>& dev,
                     double lambda) {
  double total = 0;
  for (const Example& ex : dev) {
    Tape tape;
    TeacherForward fwd =
        model.forward_teacher(tape, ex.source_ids, ex.target_ids, lambda);
    total += fwd.loss->item();
  }
  return total / static_cast<double>(dev.size());
}

Tagger make_tagger(const RunConfig& config) {
  if (!config.label_file.empty()) return file_tagger(config.label_file);
  return rule_tag_entities;
}

Vocab vocab_for_checkpoint(const RunConfig& config) {
  std::string path = config.vocab_file;
  if (path.empty())
    path = (fs::path(config.checkpoint).parent_path() / "vocab.txt").string();
  return Vocab::load(path);
}

// Checkpoints carry the trained vocab size; everything else must match
// the run config, and the vocab file must agree with the checkpoint.
SrbModel load_model(const RunConfig& config, const Vocab& vocab) {
  ModelConfig expected = config.model;
  expected.vocab_size = peek_checkpoint_config(config.checkpoint).vocab_size;
  if (vocab.size() != expected.vocab_size)
    throw DataError("incompatible checkpoint: vocab file has " +
                    std::to_string(vocab.size()) + " entries, checkpoint " +
                    std::to_string(expected.vocab_size));
  return SrbModel(load_checkpoint(config.checkpoint, expected));
}

}  // namespace

TrainResult cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.train_file.empty()) throw UsageError("train: train_file is required");

  Tagger tagger_fn;
  const Tagger* tagger = nullptr;
  if (config.anonymize && config.mode() == Vocab::Mode::Word) {
    tagger_fn = make_tagger(config);
    tagger = &tagger_fn;
  }

  LoadedCorpus train_corpus = load_corpus(config.train_file, config, tagger, true);

  Vocab vocab = [&] {
    if (!config.vocab_file.empty()) return Vocab::load(config.vocab_file);
    std::vector<std::vector<std::string>> texts;
    for (const PreparedPair& p : train_corpus.pairs) {
      texts.push_back(p.source_tokens);
      texts.push_back(p.target_tokens);
    }
    return Vocab::build(texts, config.model.vocab_size, config.mode());
  }();
  if (vocab.size() > config.model.vocab_size)
    throw DataError("train: vocab file larger than the configured vocab_size");

  ModelConfig model_config = config.model;
  model_config.vocab_size = vocab.size();  // actual size, frozen into checkpoints

  std::vector<Example> train = encode_corpus(train_corpus, vocab);
  std::vector<Example> dev;
  if (!config.dev_file.empty())
    dev = encode_corpus(load_corpus(config.dev_file, config, tagger, false), vocab);

  fs::create_directories(config.checkpoint_dir);
  TrainResult result;
  result.vocab_path = (fs::path(config.checkpoint_dir) / "vocab.txt").string();
  vocab.save(result.vocab_path);
  result.loss_log_path = (fs::path(config.checkpoint_dir) / "loss_log.tsv").string();
  std::ofstream loss_log(result.loss_log_path, std::ios::trunc);
  if (!loss_log) throw DataError("train: cannot write " + result.loss_log_path);

  SrbModel model(ModelParams::init(model_config, config.seed, config.init_scale));
  std::vector<Tensor> params = model.params().tensors();
  Adam optimizer(params, {config.learning_rate, config.adam_beta1,
                          config.adam_beta2, config.adam_eps});
  Rng shuffle_rng = shuffle_stream(config.seed);
  Rng dropout_rng = dropout_stream(config.seed);
  const double lambda = config.model.lambda_sr;

  auto save = [&](const std::string& name) {
    const std::string path = (fs::path(config.checkpoint_dir) / name).string();
    save_checkpoint(path, model.params());
    std::ofstream echo(path + ".config", std::ios::trunc);
    echo << config.echo();
    return path;
  };

  double best_dev = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);
    std::vector<Example> epoch_examples;
    epoch_examples.reserve(order.size());
    for (size_t i : order) epoch_examples.push_back(train[i]);
    const std::vector<Batch> batches = batch_pad(epoch_examples, config.batch_size);

    EpochStats stats;
    stats.epoch = epoch;
    for (size_t b = 0; b < batches.size(); ++b) {
      const Batch& batch = batches[b];
      double nll_value = 0, cos_value = 0, loss_value = 0;
      try {
        Tape tape;
        Tensor total;
        double nll_sum = 0, cos_sum = 0;
        Rng* drop = config.model.dropout_rate > 0 ? &dropout_rng : nullptr;
        for (int i = 0; i < batch.size(); ++i) {
          TeacherForward fwd = model.forward_teacher(
              tape, batch.unpadded_source(i), batch.unpadded_target(i), lambda, drop);
          total = total ? tape.add(total, fwd.loss) : fwd.loss;
          nll_sum += fwd.nll->item();
          cos_sum += fwd.cos_value;
        }
        Tensor loss = tape.scale(total, 1.0 / batch.size());
        loss_value = loss->item();
        nll_value = nll_sum / batch.size();
        cos_value = cos_sum / batch.size();
        if (!std::isfinite(loss_value)) throw NumericError("non-finite loss");

        zero_grad(std::span<const Tensor>(params));
        tape.backward(loss);
        clip_gradients(params, config.clip_norm);
        optimizer.step();
      } catch (const NumericError& e) {
        throw NumericError("train: " + std::string(e.what()) + " at epoch " +
                           std::to_string(epoch) + " batch " + std::to_string(b));
      }

      loss_log << epoch << "\t" << b << "\t" << fmt(nll_value) << "\t"
               << fmt(cos_value) << "\t" << fmt(loss_value) << "\n";
      stats.mean_nll += nll_value;
      stats.mean_cos += cos_value;
      stats.mean_loss += loss_value;
    }
    stats.mean_nll /= static_cast<double>(batches.size());
    stats.mean_cos /= static_cast<double>(batches.size());
    stats.mean_loss /= static_cast<double>(batches.size());

    result.last_checkpoint = save("epoch_" + std::to_string(epoch) + ".srb");

    if (!dev.empty() && epoch % config.eval_every == 0) {
      stats.dev_loss = dev_mean_loss(model, dev, lambda);
      stats.has_dev = true;
      if (stats.dev_loss < best_dev) {
        best_dev = stats.dev_loss;
        epochs_since_best = 0;
        result.best_checkpoint = save("best.srb");
      } else {
        ++epochs_since_best;
      }
    }

    out << "epoch " << epoch << " nll " << fmt(stats.mean_nll) << " cos "
        << fmt(stats.mean_cos) << " loss " << fmt(stats.mean_loss);
    if (stats.has_dev) out << " dev " << fmt(stats.dev_loss);
    out << "\n";
    result.epochs.push_back(stats);

    if (config.stop_train_nll > 0 && stats.mean_nll < config.stop_train_nll) break;
    if (!dev.empty() && config.early_stop_patience > 0 &&
        epochs_since_best >= config.early_stop_patience)
      break;
  }
  return result;
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.checkpoint.empty()) throw UsageError("eval: checkpoint is required");
  if (config.test_file.empty()) throw UsageError("eval: test_file is required");

  Vocab vocab = vocab_for_checkpoint(config);
  SrbModel model = load_model(config, vocab);

  Tagger tagger_fn;
  const Tagger* tagger = nullptr;
  if (config.anonymize && config.mode() == Vocab::Mode::Word) {
    tagger_fn = make_tagger(config);
    tagger = &tagger_fn;
  }

  std::vector<Record> records =
      apply_corpus_rules(read_records(config.test_file), config);
  if (records.empty()) throw DataError("eval: no test records in " + config.test_file);

  std::vector<Tokens> candidates;
  std::vector<std::vector<Tokens>> references;
  for (const Record& r : records) {
    PreparedPair pair = prepare_pair(r, config.mode(), tagger);
    const std::vector<int> source_ids = vocab.encode(pair.source_tokens);
    DecodeResult decoded =
        greedy_decode(model, vocab, source_ids,
                      config.decode_cap(static_cast<int>(source_ids.size())));
    candidates.push_back(replace_unk(decoded, pair.source_tokens, pair.recovery));
    references.push_back({tokenize(r.target, config.mode())});
  }

  EvalReport report = evaluate_corpus(candidates, references);
  if (!config.report_file.empty()) write_report(config.report_file, report);
  print_report(out, report);
  return report;
}

double cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  if (config.model.dropout_rate != 0.0)
    throw UsageError("gradcheck: refusing to run with dropout enabled "
                     "(set dropout_rate = 0)");

  ModelConfig mini;
  mini.vocab_size = 20;
  mini.embed_dim = 8;
  mini.hidden_dim = 12;
  mini.gate_hidden_dim = 16;
  mini.encoder_layers = 2;
  mini.decoder_layers = 2;
  mini.lambda_sr = config.model.lambda_sr;

  // wide init keeps the cosine term away from its degenerate
  // configuration, where no finite-difference oracle is meaningful
  SrbModel model(ModelParams::init(mini, config.seed, 2.0));

  Rng rng(config.seed + 31);
  auto sample_ids = [&](int len, bool target) {
    std::vector<int> ids(len);
    for (int& id : ids)
      id = Vocab::kNumSpecials +
           static_cast<int>(rng.below(mini.vocab_size - Vocab::kNumSpecials));
    if (target) {
      ids.front() = Vocab::kBos;
      ids.back() = Vocab::kEos;
    }
    return ids;
  };
  const std::vector<std::vector<int>> src{sample_ids(5, false), sample_ids(5, false)};
  // wrapped length 6 = BOS + 4 target tokens + EOS
  const std::vector<std::vector<int>> tgt{sample_ids(6, true), sample_ids(6, true)};

  const double lambda = config.model.lambda_sr;
  auto build = [&](Tape& tape) -> Tensor {
    Tensor total;
    for (size_t i = 0; i < src.size(); ++i) {
      TeacherForward fwd =
          model.forward_teacher(tape, src[i], tgt[i], lambda);
      total = total ? tape.add(total, fwd.loss) : fwd.loss;
    }
    return tape.scale(total, 1.0 / static_cast<double>(src.size()));
  };

  GradCheckReport report = gradient_check(build, model.params().named());
  for (const GradCheckGroup& g : report.groups) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-16s %.3e\n", g.name.c_str(), g.max_rel_err);
    out << buf;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max relative error (lambda=%g): %.3e\n",
                lambda, report.max_rel_err);
  out << buf;
  return report.max_rel_err;
}

void cmd_generate(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.checkpoint.empty()) throw UsageError("generate: checkpoint is required");
  if (config.input_file.empty()) throw UsageError("generate: input_file is required");
  if (config.output_file.empty()) throw UsageError("generate: output_file is required");

  Vocab vocab = vocab_for_checkpoint(config);
  SrbModel model = load_model(config, vocab);

  Tagger tagger_fn;
  const Tagger* tagger = nullptr;
  if (config.anonymize && config.mode() == Vocab::Mode::Word) {
    tagger_fn = make_tagger(config);
    tagger = &tagger_fn;
  }

  std::ifstream in(config.input_file);
  if (!in) throw DataError("generate: cannot open " + config.input_file);
  std::ofstream out_file(config.output_file, std::ios::trunc);
  if (!out_file) throw DataError("generate: cannot write " + config.output_file);
  std::ofstream attn_file;
  if (!config.attention_file.empty()) {
    attn_file.open(config.attention_file, std::ios::trunc);
    if (!attn_file)
      throw DataError("generate: cannot write " + config.attention_file);
  }

  const std::string joiner = config.mode() == Vocab::Mode::Char ? "" : " ";
  std::string line;
  size_t count = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> tokens = tokenize(line, config.mode());
    if (tokens.empty()) {
      out_file << "\n";  // blank in, blank out, line counts stay aligned
      if (attn_file.is_open()) attn_file << "\n";
      continue;
    }
    std::map<std::string, std::vector<std::string>> recovery;
    if (tagger) {
      Anonymized anon = anonymize_entities(tokens, *tagger);
      tokens = std::move(anon.tokens);
      recovery = std::move(anon.recovery);
    }
    const std::vector<int> source_ids = vocab.encode(tokens);
    DecodeResult decoded =
        greedy_decode(model, vocab, source_ids,
                      config.decode_cap(static_cast<int>(source_ids.size())));
    const std::vector<std::string> surface =
        replace_unk(decoded, tokens, recovery);
    for (size_t i = 0; i < surface.size(); ++i) {
      if (i) out_file << joiner;
      out_file << surface[i];
    }
    out_file << "\n";
    if (attn_file.is_open()) {
      for (const auto& row : decoded.attention) {
        for (size_t i = 0; i < row.size(); ++i) {
          if (i) attn_file << " ";
          attn_file << fmt(row[i]);
        }
        attn_file << "\n";
      }
      attn_file << "\n";
    }
    ++count;
  }
  out << "generated " << count << " lines into " << config.output_file << "\n";
}

void cmd_make_toy(const RunConfig& config, std::ostream& out) {
  if (config.output_file.empty())
    throw UsageError("make-toy: output_file is required");
  const auto task = parse_toy_task(config.toy_task);
  if (!task)
    throw UsageError("make-toy: unknown toy_task '" + config.toy_task +
                     "' (expected copy, truncate or synonym-map)");
  const std::vector<Record> records =
      make_toy_corpus(*task, config.toy_size, config.seed);
  write_records(config.output_file, records);
  out << "wrote " << records.size() << " " << config.toy_task << " pairs to "
      << config.output_file << "\n";
}

}  // namespace srb
