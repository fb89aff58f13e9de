#include "hoaxnet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hoaxnet {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const int c = in.get();
    if (c == EOF) throw DataError("checkpoint: unexpected end of file");
    v |= static_cast<std::uint32_t>(c & 0xff) << (8 * i);
  }
  return v;
}

}  // namespace

std::unique_ptr<Model> build_model(const ModelSpec& spec, const Matrix<float>* embedding,
                                   Rng& rng) {
  if (spec.architecture == Architecture::transformer) {
    return std::make_unique<TransformerClassifier<float>>(spec, rng);
  }
  if (embedding == nullptr) throw std::invalid_argument("build_model: embedding matrix required");
  return build_two_branch_model<float>(spec, *embedding, rng);
}

std::vector<std::pair<std::string, std::string>> spec_fields(const ModelSpec& s) {
  return {
      {"architecture", std::string(architecture_name(s.architecture))},
      {"title_len", std::to_string(s.title_len)},
      {"body_len", std::to_string(s.body_len)},
      {"embedding_dim", std::to_string(s.embedding_dim)},
      {"vocab_size", std::to_string(s.vocab_size)},
      {"title_units", std::to_string(s.title_units)},
      {"body_units", std::to_string(s.body_units)},
      {"title_filters", std::to_string(s.title_filters)},
      {"body_filters", std::to_string(s.body_filters)},
      {"kernel_width", std::to_string(s.kernel_width)},
      {"pool_window", std::to_string(s.pool_window)},
      {"title_dense", std::to_string(s.title_dense)},
      {"body_dense", std::to_string(s.body_dense)},
      {"dropout_branch", format_double(s.dropout_branch)},
      {"dropout_merge", format_double(s.dropout_merge)},
      {"n_blocks", std::to_string(s.n_blocks)},
      {"d_model", std::to_string(s.d_model)},
      {"heads", std::to_string(s.heads)},
      {"d_k", std::to_string(s.d_k)},
      {"d_ff", std::to_string(s.d_ff)},
      {"max_len", std::to_string(s.max_len)},
      {"n_classes", std::to_string(s.n_classes)},
  };
}

void apply_spec_field(ModelSpec& s, const std::string& key, const std::string& value) {
  auto to_int = [&] {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("model." + key + ": not an integer: " + value);
    return v;
  };
  auto to_double = [&] {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("model." + key + ": not a number: " + value);
    return v;
  };
  if (key == "architecture" || key == "arch") s.architecture = parse_architecture(value);
  else if (key == "title_len") s.title_len = to_int();
  else if (key == "body_len") s.body_len = to_int();
  else if (key == "embedding_dim") s.embedding_dim = to_int();
  else if (key == "vocab_size") s.vocab_size = to_int();
  else if (key == "title_units") s.title_units = to_int();
  else if (key == "body_units") s.body_units = to_int();
  else if (key == "title_filters") s.title_filters = to_int();
  else if (key == "body_filters") s.body_filters = to_int();
  else if (key == "kernel_width") s.kernel_width = to_int();
  else if (key == "pool_window") s.pool_window = to_int();
  else if (key == "title_dense") s.title_dense = to_int();
  else if (key == "body_dense") s.body_dense = to_int();
  else if (key == "dropout_branch") s.dropout_branch = to_double();
  else if (key == "dropout_merge" || key == "dropout") s.dropout_merge = to_double();
  else if (key == "n_blocks") s.n_blocks = to_int();
  else if (key == "d_model") s.d_model = to_int();
  else if (key == "heads") s.heads = to_int();
  else if (key == "d_k") s.d_k = to_int();
  else if (key == "d_ff") s.d_ff = to_int();
  else if (key == "max_len") s.max_len = to_int();
  else if (key == "n_classes") s.n_classes = to_int();
  else throw std::invalid_argument("unknown model field '" + key + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const CheckpointMeta& meta) {
  const auto tensors = model.state();
  std::ostringstream manifest;
  for (const auto& [k, v] : spec_fields(model.spec())) manifest << "spec." << k << '=' << v << '\n';
  for (const auto& [k, v] : meta.fields) manifest << "meta." << k << '=' << v << '\n';
  for (const auto& t : tensors) {
    manifest << "tensor " << t.name << ' ' << t.tensor.rows() << ' ' << t.tensor.cols() << '\n';
  }
  for (const auto& tok : meta.vocab) manifest << "vocab " << tok << '\n';
  const std::string text = manifest.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  out.put(static_cast<char>(kCheckpointVersion));
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors) {
    const auto& m = t.tensor.value();
    for (Index i = 0; i < m.size(); ++i) write_u32(out, std::bit_cast<std::uint32_t>(m.data()[i]));
  }
  if (!out) throw DataError("error writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[sizeof kCheckpointMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw DataError(path.string() + ": not a checkpoint (bad magic)");
  }
  const int version = in.get();
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t manifest_len = read_u32(in);
  std::string text(manifest_len, '\0');
  in.read(text.data(), manifest_len);
  if (!in) throw DataError(path.string() + ": truncated manifest");

  ModelSpec spec;
  LoadedCheckpoint loaded;
  struct Entry {
    std::string name;
    Index rows, cols;
  };
  std::vector<Entry> entries;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("vocab ", 0) == 0) {
      loaded.meta.vocab.push_back(line.substr(6));
    } else if (line.rfind("tensor ", 0) == 0) {
      std::istringstream f(line.substr(7));
      Entry e;
      if (!(f >> e.name >> e.rows >> e.cols)) throw DataError("checkpoint: bad tensor line: " + line);
      entries.push_back(e);
    } else if (const auto eq = line.find('='); eq != std::string::npos) {
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key.rfind("spec.", 0) == 0) {
        apply_spec_field(spec, key.substr(5), value);
      } else if (key.rfind("meta.", 0) == 0) {
        loaded.meta.fields[key.substr(5)] = value;
      }
    } else if (!line.empty()) {
      throw DataError("checkpoint: unrecognized manifest line: " + line);
    }
  }

  Matrix<float> embedding;
  if (spec.architecture != Architecture::transformer) {
    for (const auto& e : entries) {
      if (e.name == "embedding") embedding = Matrix<float>::Zero(e.rows, e.cols);
    }
    if (embedding.size() == 0) throw DataError("checkpoint: missing embedding tensor");
  }
  Rng rng(0);
  loaded.model = build_model(spec, &embedding, rng);

  const auto state = loaded.model->state();
  if (state.size() != entries.size()) {
    throw DataError("checkpoint: " + std::to_string(entries.size()) + " tensors stored, model has " +
                    std::to_string(state.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& t = state[i];
    const auto& e = entries[i];
    if (t.name != e.name || t.tensor.rows() != e.rows || t.tensor.cols() != e.cols) {
      throw DataError("checkpoint: tensor " + e.name + " " + shape_string(e.rows, e.cols) +
                      " does not match model tensor " + t.name + " " + t.tensor.shape_str());
    }
    auto& m = t.tensor.mutable_value();
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = std::bit_cast<float>(read_u32(in));
  }
  return loaded;
}

}  // namespace hoaxnet
