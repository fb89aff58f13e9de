#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hoaxnet {

enum class Architecture { lstm, cnn, transformer };

Architecture parse_architecture(std::string_view name);
std::string_view architecture_name(Architecture arch);

// Architecture choice and layer sizes. Unused fields are ignored by the
// builder of the other architectures.
struct ModelSpec {
  Architecture architecture = Architecture::lstm;

  // Two-branch models.
  int title_len = 13;
  int body_len = 64;
  int embedding_dim = 16;
  int vocab_size = 0;

  int title_units = 8;   // BiLSTM units per direction
  int body_units = 16;
  int title_filters = 8;
  int body_filters = 16;
  int kernel_width = 3;
  int pool_window = 2;
  int title_dense = 16;
  int body_dense = 16;
  double dropout_branch = 0.0;  // on each branch before its dense layer
  double dropout_merge = 0.1;   // on the merged representation

  // Transformer encoder.
  int n_blocks = 2;
  int d_model = 32;
  int heads = 2;
  int d_k = 16;
  int d_ff = 64;
  int max_len = 128;

  int n_classes = 2;

  // Throws std::invalid_argument describing the first bad field.
  void validate() const;

  // Layer sizes and dropouts of the tuned LSTM and CNN models at corpus scale.
  static ModelSpec full_scale_lstm();
  static ModelSpec full_scale_cnn();
  static ModelSpec toy(Architecture arch);
};

}  // namespace hoaxnet
