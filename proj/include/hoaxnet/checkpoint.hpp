#pragma once

// Model construction from a spec and the binary checkpoint format:
//
//   "HOAXNET1" | u8 version | u32 LE manifest byte length | manifest text |
//   tensors as little-endian float32, row-major, in manifest order.
//
// The manifest is line-oriented: "key=value" spec and metadata lines,
// "tensor <name> <rows> <cols>" lines, then "vocab <token>" lines.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hoaxnet/layers.hpp"
#include "hoaxnet/transformer.hpp"

namespace hoaxnet {

using Model = Classifier<float>;

inline constexpr char kCheckpointMagic[8] = {'H', 'O', 'A', 'X', 'N', 'E', 'T', '1'};
inline constexpr unsigned char kCheckpointVersion = 1;

// `embedding` is required for lstm/cnn and ignored for transformer.
std::unique_ptr<Model> build_model(const ModelSpec& spec, const Matrix<float>* embedding, Rng& rng);

struct CheckpointMeta {
  std::map<std::string, std::string> fields;
  // Vocabulary tokens in id order (word tokens from id 2, or the full
  // WordPiece list).
  std::vector<std::string> vocab;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Stable key=value rendering of every spec field.
std::vector<std::pair<std::string, std::string>> spec_fields(const ModelSpec& spec);
void apply_spec_field(ModelSpec& spec, const std::string& key, const std::string& value);

}  // namespace hoaxnet
