#include "hoaxnet/model_spec.hpp"

#include <stdexcept>
#include <string>

namespace hoaxnet {

Architecture parse_architecture(std::string_view name) {
  if (name == "lstm") return Architecture::lstm;
  if (name == "cnn") return Architecture::cnn;
  if (name == "transformer") return Architecture::transformer;
  throw std::invalid_argument("unknown architecture '" + std::string(name) +
                              "' (expected lstm, cnn or transformer)");
}

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::lstm: return "lstm";
    case Architecture::cnn: return "cnn";
    case Architecture::transformer: return "transformer";
  }
  return "?";
}

void ModelSpec::validate() const {
  auto positive = [](const char* name, int v) {
    if (v < 1) throw std::invalid_argument(std::string("model spec: ") + name + " must be positive, got " + std::to_string(v));
  };
  auto rate = [](const char* name, double v) {
    if (!(v >= 0.0 && v < 1.0)) {
      throw std::invalid_argument(std::string("model spec: ") + name + " must be in [0, 1), got " + std::to_string(v));
    }
  };
  positive("n_classes", n_classes);
  rate("dropout_branch", dropout_branch);
  rate("dropout_merge", dropout_merge);
  switch (architecture) {
    case Architecture::lstm:
      positive("title_len", title_len);
      positive("body_len", body_len);
      positive("title_units", title_units);
      positive("body_units", body_units);
      positive("title_dense", title_dense);
      positive("body_dense", body_dense);
      break;
    case Architecture::cnn:
      positive("title_len", title_len);
      positive("body_len", body_len);
      positive("title_filters", title_filters);
      positive("body_filters", body_filters);
      positive("kernel_width", kernel_width);
      positive("pool_window", pool_window);
      positive("title_dense", title_dense);
      positive("body_dense", body_dense);
      if (title_len < kernel_width || body_len < kernel_width) {
        throw std::invalid_argument("model spec: sequence lengths must be at least kernel_width");
      }
      break;
    case Architecture::transformer:
      positive("n_blocks", n_blocks);
      positive("d_model", d_model);
      positive("heads", heads);
      positive("d_k", d_k);
      positive("d_ff", d_ff);
      if (max_len < 3) throw std::invalid_argument("model spec: max_len must be at least 3");
      break;
  }
}

ModelSpec ModelSpec::full_scale_lstm() {
  ModelSpec s;
  s.architecture = Architecture::lstm;
  s.title_len = 13;
  s.body_len = 1606;
  s.embedding_dim = 300;
  s.title_units = 46;
  s.body_units = 231;
  s.title_dense = 73;
  s.body_dense = 24;
  s.dropout_branch = 0.0;
  s.dropout_merge = 0.106;
  return s;
}

ModelSpec ModelSpec::full_scale_cnn() {
  ModelSpec s;
  s.architecture = Architecture::cnn;
  s.title_len = 13;
  s.body_len = 1606;
  s.embedding_dim = 300;
  s.title_filters = 8;
  s.body_filters = 42;
  s.title_dense = 6;
  s.body_dense = 34;
  s.dropout_branch = 0.110;
  s.dropout_merge = 0.159;
  return s;
}

ModelSpec ModelSpec::toy(Architecture arch) {
  ModelSpec s;
  s.architecture = arch;
  if (arch == Architecture::lstm) {
    s.dropout_merge = 0.106;
  } else if (arch == Architecture::cnn) {
    s.dropout_branch = 0.110;
    s.dropout_merge = 0.159;
  } else {
    s.dropout_merge = 0.1;
    s.max_len = 64;
  }
  return s;
}

}  // namespace hoaxnet
