#include "srb/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "srb/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace srb {

namespace {

constexpr char kMagic[4] = {'S', 'R', 'B', '1'};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string config_line(const ModelConfig& c) {
  std::ostringstream os;
  os << "config vocab_size=" << c.vocab_size << " embed_dim=" << c.embed_dim
     << " hidden_dim=" << c.hidden_dim << " encoder_layers=" << c.encoder_layers
     << " decoder_layers=" << c.decoder_layers
     << " gate_hidden_dim=" << c.gate_hidden_dim
     << " dropout_rate=" << format_double(c.dropout_rate)
     << " lambda_sr=" << format_double(c.lambda_sr);
  return os.str();
}

ModelConfig parse_config_line(const std::string& line) {
  std::istringstream is(line);
  std::string word;
  is >> word;  // "config"
  ModelConfig c;
  std::map<std::string, std::string> kv;
  while (is >> word) {
    const size_t eq = word.find('=');
    if (eq == std::string::npos)
      throw DataError("checkpoint: malformed config entry '" + word + "'");
    kv[word.substr(0, eq)] = word.substr(eq + 1);
  }
  try {
    c.vocab_size = std::stoi(kv.at("vocab_size"));
    c.embed_dim = std::stoi(kv.at("embed_dim"));
    c.hidden_dim = std::stoi(kv.at("hidden_dim"));
    c.encoder_layers = std::stoi(kv.at("encoder_layers"));
    c.decoder_layers = std::stoi(kv.at("decoder_layers"));
    c.gate_hidden_dim = std::stoi(kv.at("gate_hidden_dim"));
    c.dropout_rate = std::stod(kv.at("dropout_rate"));
    c.lambda_sr = std::stod(kv.at("lambda_sr"));
  } catch (const std::exception&) {
    throw DataError("checkpoint: incomplete config line");
  }
  return c;
}

std::string shape_field(const Shape& shape) {
  std::string s;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s;
}

Shape parse_shape_field(const std::string& field) {
  Shape shape;
  size_t pos = 0;
  while (pos < field.size()) {
    size_t next = field.find('x', pos);
    if (next == std::string::npos) next = field.size();
    shape.push_back(std::stoi(field.substr(pos, next - pos)));
    pos = next + 1;
  }
  return shape;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ostringstream manifest;
  manifest << config_line(params.config) << "\n";
  uint64_t offset = 0;
  for (const auto& [name, t] : params.named()) {
    manifest << "param " << name << " " << shape_field(t->shape) << " " << offset
             << "\n";
    offset += static_cast<uint64_t>(t->value.size()) * sizeof(float);
  }
  const std::string text = manifest.str();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  const uint32_t len = static_cast<uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : params.named()) {
    for (double v : t->value) {
      const float f = static_cast<float>(v);
      out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
  }
  if (!out) throw DataError("checkpoint: write failed for " + path);
}

namespace {

struct ParsedCheckpoint {
  ModelConfig config;
  std::vector<std::tuple<std::string, Shape, uint64_t>> entries;
  std::string data;  // raw float bytes
};

ParsedCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("checkpoint: bad magic in " + path);
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw DataError("checkpoint: truncated manifest length in " + path);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw DataError("checkpoint: truncated manifest in " + path);

  ParsedCheckpoint parsed;
  bool have_config = false;
  std::istringstream manifest(text);
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    if (line.rfind("config ", 0) == 0) {
      parsed.config = parse_config_line(line);
      have_config = true;
    } else if (line.rfind("param ", 0) == 0) {
      std::istringstream is(line);
      std::string word, name, shape_text;
      uint64_t offset = 0;
      is >> word >> name >> shape_text >> offset;
      if (!is) throw DataError("checkpoint: malformed param line '" + line + "'");
      parsed.entries.emplace_back(name, parse_shape_field(shape_text), offset);
    } else {
      throw DataError("checkpoint: unknown manifest line '" + line + "'");
    }
  }
  if (!have_config) throw DataError("checkpoint: missing config line in " + path);

  std::ostringstream data;
  data << in.rdbuf();
  parsed.data = data.str();
  return parsed;
}

}  // namespace

ModelConfig peek_checkpoint_config(const std::string& path) {
  return read_checkpoint(path).config;
}

ModelParams load_checkpoint(const std::string& path,
                            const std::optional<ModelConfig>& expected) {
  ParsedCheckpoint parsed = read_checkpoint(path);
  if (expected && !expected->same_dims(parsed.config))
    throw DataError("incompatible checkpoint: " + path +
                    " was trained with different model dimensions");

  ModelParams params = ModelParams::zeros_like(parsed.config);
  if (parsed.entries.size() != params.named().size())
    throw DataError("checkpoint: expected " +
                    std::to_string(params.named().size()) + " parameters, found " +
                    std::to_string(parsed.entries.size()));

  for (size_t i = 0; i < parsed.entries.size(); ++i) {
    const auto& [name, shape, offset] = parsed.entries[i];
    const auto& [want_name, t] = params.named()[i];
    if (name != want_name)
      throw DataError("checkpoint: parameter '" + name + "' where '" + want_name +
                      "' was expected");
    if (shape != t->shape)
      throw DataError("checkpoint: shape mismatch for '" + name + "'");
    const uint64_t bytes = static_cast<uint64_t>(t->value.size()) * sizeof(float);
    if (offset + bytes > parsed.data.size())
      throw DataError("checkpoint: data section too short for '" + name + "'");
    for (size_t k = 0; k < t->value.size(); ++k) {
      float f;
      std::memcpy(&f, parsed.data.data() + offset + k * sizeof(float), sizeof(float));
      t->value[k] = static_cast<double>(f);
    }
  }
  return params;
}

}  // namespace srb
