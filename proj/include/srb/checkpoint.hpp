#pragma once

#include <optional>
#include <string>

#include "srb/model.hpp"

namespace srb {

// Checkpoint container: the magic bytes "SRB1", a little-endian uint32
// manifest length, the manifest text, then each parameter's values as
// raw row-major float32 little-endian.
//
// Manifest lines:
//   config <key>=<value> ...          (full ModelConfig echo)
//   param <name> <d0>x<d1>... <byte offset into the data section>
void save_checkpoint(const std::string& path, const ModelParams& params);

// Loads a checkpoint; validates magic, manifest and sizes. When
// `expected` is given, its dimensions must match the embedded config or
// a DataError("incompatible checkpoint ...") is thrown.
ModelParams load_checkpoint(const std::string& path,
                            const std::optional<ModelConfig>& expected = std::nullopt);

// Reads only the embedded ModelConfig.
ModelConfig peek_checkpoint_config(const std::string& path);

}  // namespace srb
