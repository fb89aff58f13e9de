#pragma once

// Flat key=value run configuration with section prefixes:
//
//   seed=7
//   data.dataset=corpus.csv        data.embeddings=...   data.wordpiece_vocab=...
//   data.max_vocab=0               paths.work=work
//   model.arch=lstm                model.<spec field>=<value>
//   train.optimizer=sgd_momentum   train.learning_rate=  train.momentum=
//   train.batch_size=32            train.max_epochs=20   train.patience=2
//   train.clip_norm=5
//   tune.budget=10  tune.n_init=3  tune.epochs=3
//   tune.space.<name>=continuous|integer <lower> <upper>
//
// '#' starts a comment line. Relative paths resolve against the directory of
// the config file.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hoaxnet/bayesopt.hpp"
#include "hoaxnet/model_spec.hpp"
#include "hoaxnet/training.hpp"

namespace hoaxnet {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::filesystem::path base_dir = ".";
  std::filesystem::path dataset;
  std::filesystem::path embeddings;
  std::filesystem::path wordpiece_vocab;
  std::filesystem::path work_dir = "work";
  std::size_t max_vocab = 0;
  std::uint64_t seed = 1;

  Architecture architecture = Architecture::lstm;
  std::vector<std::pair<std::string, std::string>> model_overrides;

  std::optional<OptimizerKind> optimizer;
  std::optional<double> learning_rate;
  std::optional<double> momentum;
  std::optional<int> batch_size;
  std::optional<double> clip_norm;
  int max_epochs = 20;
  int patience = 2;

  int tune_budget = 10;
  int tune_n_init = 3;
  int tune_epochs = 3;
  SearchSpace tune_space;  // empty: default_tune_space()

  static RunConfig parse(std::istream& in, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Applies one key; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path work() const { return resolve(work_dir); }

  // Toy spec of the architecture with model.* overrides applied.
  ModelSpec model_spec() const;
  // Architecture defaults with train.* overrides applied.
  Hyperparameters hyperparameters() const;
  SearchSpace search_space() const;
};

SearchSpace default_tune_space(Architecture arch);

// Writes a tuned value into the hyperparameters (learning_rate, momentum,
// batch_size) or else into the model spec.
void apply_tuned_value(const std::string& name, double value, Dimension::Kind kind,
                       Hyperparameters& hp, ModelSpec& spec);

}  // namespace hoaxnet
