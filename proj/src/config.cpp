#include "srb/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "srb/errors.hpp"

namespace srb {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

void apply_profile(RunConfig& c) {
  if (c.profile == "summarization") {
    c.tokenize_mode = "char";
    c.model.vocab_size = 4000;
    c.model.embed_dim = 400;
    c.model.hidden_dim = 500;
    c.model.gate_hidden_dim = 1000;
    c.model.dropout_rate = 0.0;
    c.batch_size = 32;
    c.max_epochs = 10;
    c.anonymize = false;
    c.max_pair_tokens = 0;
  } else if (c.profile == "simplification") {
    c.tokenize_mode = "word";
    c.model.vocab_size = 50000;
    c.model.embed_dim = 256;
    c.model.hidden_dim = 256;
    c.model.gate_hidden_dim = 256;
    c.model.dropout_rate = 0.4;
    c.batch_size = 64;
    c.max_epochs = 10;
    c.anonymize = true;
    c.max_pair_tokens = 100;
  } else if (c.profile == "toy") {
    // char mode: toy tokens are single letters either way, and the
    // word-mode NE@N reservation would not fit a 30-entry vocab
    c.tokenize_mode = "char";
    c.model.vocab_size = 30;
    c.model.embed_dim = 32;
    c.model.hidden_dim = 64;
    c.model.gate_hidden_dim = 32;
    c.model.dropout_rate = 0.0;
    c.batch_size = 16;
    c.max_epochs = 500;
    c.anonymize = false;
    c.max_pair_tokens = 0;
    c.init_scale = 4.0;
  } else {
    throw UsageError("config: unknown profile '" + c.profile +
                     "' (expected summarization, simplification or toy)");
  }
  c.model.encoder_layers = 2;
  c.model.decoder_layers = 2;
  c.model.lambda_sr = 1e-4;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' needs an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' needs a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw UsageError("config: key '" + key + "' needs a boolean, got '" + v + "'");
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw UsageError("config: key '" + key + "' needs an unsigned integer, got '" +
                     v + "'");
  }
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "profile") return;  // handled in the first pass
  if (key == "vocab_size") c.model.vocab_size = to_int(key, value);
  else if (key == "embed_dim") c.model.embed_dim = to_int(key, value);
  else if (key == "hidden_dim") c.model.hidden_dim = to_int(key, value);
  else if (key == "encoder_layers") c.model.encoder_layers = to_int(key, value);
  else if (key == "decoder_layers") c.model.decoder_layers = to_int(key, value);
  else if (key == "gate_hidden_dim") c.model.gate_hidden_dim = to_int(key, value);
  else if (key == "dropout_rate") c.model.dropout_rate = to_double(key, value);
  else if (key == "lambda_sr") c.model.lambda_sr = to_double(key, value);
  else if (key == "learning_rate") c.learning_rate = to_double(key, value);
  else if (key == "adam_beta1") c.adam_beta1 = to_double(key, value);
  else if (key == "adam_beta2") c.adam_beta2 = to_double(key, value);
  else if (key == "adam_eps") c.adam_eps = to_double(key, value);
  else if (key == "clip_norm") c.clip_norm = to_double(key, value);
  else if (key == "init_scale") c.init_scale = to_double(key, value);
  else if (key == "batch_size") c.batch_size = to_int(key, value);
  else if (key == "max_epochs") c.max_epochs = to_int(key, value);
  else if (key == "seed") c.seed = to_u64(key, value);
  else if (key == "shuffle") c.shuffle = to_bool(key, value);
  else if (key == "eval_every") c.eval_every = to_int(key, value);
  else if (key == "early_stop_patience") c.early_stop_patience = to_int(key, value);
  else if (key == "stop_train_nll") c.stop_train_nll = to_double(key, value);
  else if (key == "tokenize_mode") c.tokenize_mode = value;
  else if (key == "anonymize") c.anonymize = to_bool(key, value);
  else if (key == "max_pair_tokens") c.max_pair_tokens = to_int(key, value);
  else if (key == "max_decode_len") c.max_decode_len = to_int(key, value);
  else if (key == "train_file") c.train_file = value;
  else if (key == "dev_file") c.dev_file = value;
  else if (key == "test_file") c.test_file = value;
  else if (key == "vocab_file") c.vocab_file = value;
  else if (key == "label_file") c.label_file = value;
  else if (key == "checkpoint_dir") c.checkpoint_dir = value;
  else if (key == "checkpoint") c.checkpoint = value;
  else if (key == "input_file") c.input_file = value;
  else if (key == "output_file") c.output_file = value;
  else if (key == "attention_file") c.attention_file = value;
  else if (key == "report_file") c.report_file = value;
  else if (key == "toy_task") c.toy_task = value;
  else if (key == "toy_size") c.toy_size = to_int(key, value);
  else throw UsageError("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw UsageError("config: " + path + ":" + std::to_string(line_no) +
                       " is not a key = value line");
    pairs.emplace_back(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  return pairs;
}

std::pair<std::string, std::string> parse_override(const std::string& raw) {
  const size_t eq = raw.find('=');
  if (eq == std::string::npos)
    throw UsageError("flags: expected --key=value, got '--" + raw + "'");
  return {trim(raw.substr(0, eq)), trim(raw.substr(eq + 1))};
}

}  // namespace

Vocab::Mode RunConfig::mode() const {
  if (tokenize_mode == "char") return Vocab::Mode::Char;
  if (tokenize_mode == "word") return Vocab::Mode::Word;
  throw UsageError("config: tokenize_mode must be char or word, got '" +
                   tokenize_mode + "'");
}

int RunConfig::decode_cap(int source_len) const {
  if (max_decode_len > 0) return max_decode_len;
  if (profile == "summarization") return 30;
  return std::max(1, (3 * source_len + 1) / 2);
}

void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  (void)mode();
  if (batch_size < 1) throw UsageError("config: batch_size must be positive");
  if (max_epochs < 1) throw UsageError("config: max_epochs must be positive");
  if (eval_every < 1) throw UsageError("config: eval_every must be positive");
  if (clip_norm <= 0) throw UsageError("config: clip_norm must be positive");
  if (learning_rate <= 0) throw UsageError("config: learning_rate must be positive");
  if (init_scale <= 0) throw UsageError("config: init_scale must be positive");
  if (toy_size < 1) throw UsageError("config: toy_size must be positive");
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "profile = " << profile << "\n";
  os << "vocab_size = " << model.vocab_size << "\n";
  os << "embed_dim = " << model.embed_dim << "\n";
  os << "hidden_dim = " << model.hidden_dim << "\n";
  os << "encoder_layers = " << model.encoder_layers << "\n";
  os << "decoder_layers = " << model.decoder_layers << "\n";
  os << "gate_hidden_dim = " << model.gate_hidden_dim << "\n";
  os << "dropout_rate = " << num(model.dropout_rate) << "\n";
  os << "lambda_sr = " << num(model.lambda_sr) << "\n";
  os << "learning_rate = " << num(learning_rate) << "\n";
  os << "adam_beta1 = " << num(adam_beta1) << "\n";
  os << "adam_beta2 = " << num(adam_beta2) << "\n";
  os << "adam_eps = " << num(adam_eps) << "\n";
  os << "clip_norm = " << num(clip_norm) << "\n";
  os << "init_scale = " << num(init_scale) << "\n";
  os << "batch_size = " << batch_size << "\n";
  os << "max_epochs = " << max_epochs << "\n";
  os << "seed = " << seed << "\n";
  os << "shuffle = " << (shuffle ? 1 : 0) << "\n";
  os << "eval_every = " << eval_every << "\n";
  os << "early_stop_patience = " << early_stop_patience << "\n";
  os << "stop_train_nll = " << num(stop_train_nll) << "\n";
  os << "tokenize_mode = " << tokenize_mode << "\n";
  os << "anonymize = " << (anonymize ? 1 : 0) << "\n";
  os << "max_pair_tokens = " << max_pair_tokens << "\n";
  os << "max_decode_len = " << max_decode_len << "\n";
  os << "train_file = " << train_file << "\n";
  os << "dev_file = " << dev_file << "\n";
  os << "test_file = " << test_file << "\n";
  os << "vocab_file = " << vocab_file << "\n";
  os << "label_file = " << label_file << "\n";
  os << "checkpoint_dir = " << checkpoint_dir << "\n";
  os << "checkpoint = " << checkpoint << "\n";
  os << "input_file = " << input_file << "\n";
  os << "output_file = " << output_file << "\n";
  os << "attention_file = " << attention_file << "\n";
  os << "report_file = " << report_file << "\n";
  os << "toy_task = " << toy_task << "\n";
  os << "toy_size = " << toy_size << "\n";
  return os.str();
}

RunConfig make_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (!config_path.empty()) pairs = parse_file(config_path);
  for (const std::string& raw : overrides) pairs.push_back(parse_override(raw));

  RunConfig config;
  for (const auto& [key, value] : pairs)
    if (key == "profile") config.profile = value;
  apply_profile(config);
  for (const auto& [key, value] : pairs) apply_key(config, key, value);
  return config;
}

}  // namespace srb
