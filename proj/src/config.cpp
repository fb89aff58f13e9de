#include "hoaxnet/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hoaxnet/checkpoint.hpp"

namespace hoaxnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  in >> v;
  if (!in || !in.eof()) throw ConfigError(key + ": bad value '" + value + "'");
  return v;
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse(in, base);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "data.dataset") dataset = value;
  else if (key == "data.embeddings") embeddings = value;
  else if (key == "data.wordpiece_vocab") wordpiece_vocab = value;
  else if (key == "data.max_vocab") max_vocab = parse_number<std::size_t>(key, value);
  else if (key == "paths.work") work_dir = value;
  else if (key == "model.arch" || key == "model.architecture") architecture = parse_architecture(value);
  else if (key.rfind("model.", 0) == 0) {
    const std::string field = key.substr(6);
    ModelSpec probe;
    apply_spec_field(probe, field, value);  // validates name and value now
    model_overrides.emplace_back(field, value);
  } else if (key == "train.optimizer") optimizer = parse_optimizer(value);
  else if (key == "train.learning_rate") learning_rate = parse_number<double>(key, value);
  else if (key == "train.momentum") momentum = parse_number<double>(key, value);
  else if (key == "train.batch_size") batch_size = parse_number<int>(key, value);
  else if (key == "train.clip_norm") clip_norm = parse_number<double>(key, value);
  else if (key == "train.max_epochs") max_epochs = parse_number<int>(key, value);
  else if (key == "train.patience") patience = parse_number<int>(key, value);
  else if (key == "tune.budget") tune_budget = parse_number<int>(key, value);
  else if (key == "tune.n_init") tune_n_init = parse_number<int>(key, value);
  else if (key == "tune.epochs") tune_epochs = parse_number<int>(key, value);
  else if (key.rfind("tune.space.", 0) == 0) {
    Dimension d;
    d.name = key.substr(11);
    std::istringstream in(value);
    std::string kind;
    in >> kind >> d.lower >> d.upper;
    if (!in) throw ConfigError(key + ": expected 'continuous|integer <lower> <upper>'");
    if (kind == "continuous") d.kind = Dimension::Kind::continuous;
    else if (kind == "integer") d.kind = Dimension::Kind::integer;
    else throw ConfigError(key + ": unknown dimension kind '" + kind + "'");
    std::erase_if(tune_space.dims, [&](const Dimension& x) { return x.name == d.name; });
    tune_space.dims.push_back(d);
    tune_space.validate();
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec s = ModelSpec::toy(architecture);
  for (const auto& [k, v] : model_overrides) apply_spec_field(s, k, v);
  s.architecture = architecture;
  return s;
}

Hyperparameters RunConfig::hyperparameters() const {
  Hyperparameters hp = Hyperparameters::defaults(architecture);
  if (optimizer) hp.optimizer = *optimizer;
  if (learning_rate) hp.learning_rate = *learning_rate;
  if (momentum) hp.momentum = *momentum;
  if (batch_size) hp.batch_size = *batch_size;
  if (clip_norm) hp.clip_norm = *clip_norm;
  return hp;
}

SearchSpace RunConfig::search_space() const {
  return tune_space.dims.empty() ? default_tune_space(architecture) : tune_space;
}

SearchSpace default_tune_space(Architecture arch) {
  using K = Dimension::Kind;
  SearchSpace s;
  if (arch == Architecture::transformer) {
    s.dims = {{"learning_rate", K::continuous, 1e-4, 5e-3},
              {"dropout_merge", K::continuous, 0.0, 0.3}};
  } else {
    s.dims = {{"learning_rate", K::continuous, 0.01, 0.5},
              {"momentum", K::continuous, 0.0, 0.9},
              {"dropout_merge", K::continuous, 0.0, 0.5}};
  }
  return s;
}

void apply_tuned_value(const std::string& name, double value, Dimension::Kind kind,
                       Hyperparameters& hp, ModelSpec& spec) {
  if (name == "learning_rate") hp.learning_rate = value;
  else if (name == "momentum") hp.momentum = value;
  else if (name == "batch_size") hp.batch_size = static_cast<int>(std::lround(value));
  else if (kind == Dimension::Kind::integer) apply_spec_field(spec, name, std::to_string(std::lround(value)));
  else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    apply_spec_field(spec, name, buf);
  }
}

}  // namespace hoaxnet
