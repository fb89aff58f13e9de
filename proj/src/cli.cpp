#include "hoaxnet/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hoaxnet/bayesopt.hpp"
#include "hoaxnet/checkpoint.hpp"
#include "hoaxnet/config.hpp"
#include "hoaxnet/metrics.hpp"
#include "hoaxnet/synthetic.hpp"
#include "hoaxnet/textpipe.hpp"
#include "hoaxnet/training.hpp"
#include "hoaxnet/wordpiece.hpp"

namespace hoaxnet {

namespace fs = std::filesystem;

namespace {

constexpr const char* kIdsFile = "encoded_ids.tsv";
constexpr const char* kPairsFile = "encoded_pairs.tsv";
constexpr const char* kVocabFile = "vocab.txt";
constexpr const char* kWordPieceFile = "wordpiece_vocab.txt";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("error writing " + path.string());
}

std::string join_ids(std::span<const std::int32_t> ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::vector<std::int32_t> split_ids(const std::string& field) {
  std::vector<std::int32_t> ids;
  std::istringstream in(field);
  long long v;
  while (in >> v) ids.push_back(static_cast<std::int32_t>(v));
  return ids;
}

std::string clean_field(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Encoded dataset files: one "# key=value ..." header, then tab-separated
// rows "id split label ids..." with space-separated id lists.

struct EncodedSet {
  std::map<std::string, std::string> header;
  std::vector<EncodedArticle> rows;
  std::vector<std::string> splits;

  std::vector<EncodedArticle> part(const std::string& split) const {
    std::vector<EncodedArticle> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (split == "all" || splits[i] == split) out.push_back(rows[i]);
    }
    return out;
  }

  const std::string& get(const std::string& key) const {
    const auto it = header.find(key);
    if (it == header.end()) throw DataError("encoded dataset header lacks '" + key + "'");
    return it->second;
  }
};

EncodedSet read_encoded(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string() + " (run preprocess first)");
  EncodedSet set;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw DataError(path.string() + ": missing header line");
  }
  std::istringstream hs(line.substr(2));
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq != std::string::npos) set.header[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const bool pairs = set.get("format") == "pairs";
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != (pairs ? 4u : 5u)) {
      throw DataError(path.string() + ": line " + std::to_string(lineno) + ": wrong column count");
    }
    EncodedArticle a;
    a.id = cols[0];
    a.label = cols[2] == "1" ? kTrue : kFake;
    if (pairs) {
      a.pair_ids = split_ids(cols[3]);
    } else {
      a.title_ids = split_ids(cols[3]);
      a.body_ids = split_ids(cols[4]);
    }
    set.splits.push_back(cols[1]);
    set.rows.push_back(std::move(a));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Vocabulary handling shared by training, evaluation and prediction.

struct TextEncoder {
  Architecture arch = Architecture::lstm;
  Vocabulary words;
  WordPieceVocab pieces;
  int title_len = 0, body_len = 0, max_len = 0;

  std::uint64_t fingerprint() const {
    return arch == Architecture::transformer ? pieces.fingerprint() : words.fingerprint();
  }

  EncodedArticle encode_article(const Article& a) const {
    EncodedArticle e;
    e.id = a.id;
    e.label = a.label;
    if (arch == Architecture::transformer) {
      e.pair_ids = encode_pair(a.title, a.body, pieces, static_cast<std::size_t>(max_len));
    } else {
      e.title_ids = encode(tokenize_basic(a.title), words, title_len);
      e.body_ids = encode(tokenize_basic(a.body), words, body_len);
    }
    return e;
  }

  static TextEncoder from_checkpoint(const LoadedCheckpoint& ck) {
    TextEncoder enc;
    const auto& spec = ck.model->spec();
    enc.arch = spec.architecture;
    enc.title_len = spec.title_len;
    enc.body_len = spec.body_len;
    enc.max_len = spec.max_len;
    if (enc.arch == Architecture::transformer) enc.pieces = WordPieceVocab::from_tokens(ck.meta.vocab);
    else enc.words = Vocabulary::from_tokens(ck.meta.vocab);
    const auto it = ck.meta.fields.find("vocab_fingerprint");
    if (it == ck.meta.fields.end() || it->second != hex64(enc.fingerprint())) {
      throw DataError("checkpoint vocabulary does not match its recorded fingerprint");
    }
    return enc;
  }
};

EmbeddingMatrix embeddings_for(const RunConfig& cfg, const Vocabulary& vocab, int dim) {
  if (!cfg.embeddings.empty()) return load_embeddings(cfg.resolve(cfg.embeddings), vocab);
  // No pretrained vectors configured: seeded random table, still frozen.
  EmbeddingMatrix e;
  Rng rng(cfg.seed ^ 0xe3be5eedULL);
  e.weights = Matrix<float>::Zero(static_cast<Index>(vocab.size()), dim);
  for (Index i = Vocabulary::kFirstToken; i < e.weights.rows(); ++i) {
    for (Index j = 0; j < dim; ++j) e.weights(i, j) = static_cast<float>(0.5 * rng.normal());
  }
  e.missing = vocab.size() - Vocabulary::kFirstToken;
  return e;
}

struct Workspace {
  EncodedSet data;
  ModelSpec spec;
  Vocabulary words;
  WordPieceVocab pieces;
  EmbeddingMatrix embedding;
  CheckpointMeta meta;
};

Workspace open_workspace(const RunConfig& cfg) {
  Workspace ws;
  const fs::path work = cfg.work();
  ws.spec = cfg.model_spec();
  if (cfg.architecture == Architecture::transformer) {
    ws.data = read_encoded(work / kPairsFile);
    ws.pieces = WordPieceVocab::load(work / kWordPieceFile);
    if (ws.data.get("vocab_fingerprint") != hex64(ws.pieces.fingerprint())) {
      throw DataError("encoded pairs were produced with a different WordPiece vocabulary");
    }
    ws.spec.max_len = std::stoi(ws.data.get("max_len"));
    ws.spec.vocab_size = static_cast<int>(ws.pieces.size());
    ws.meta.vocab = ws.pieces.tokens();
    ws.meta.fields["vocab_kind"] = "wordpiece";
    ws.meta.fields["vocab_fingerprint"] = hex64(ws.pieces.fingerprint());
  } else {
    ws.data = read_encoded(work / kIdsFile);
    ws.words = Vocabulary::load(work / kVocabFile);
    if (ws.data.get("vocab_fingerprint") != hex64(ws.words.fingerprint())) {
      throw DataError("encoded dataset was produced with a different vocabulary");
    }
    ws.spec.title_len = std::stoi(ws.data.get("title_len"));
    ws.spec.body_len = std::stoi(ws.data.get("body_len"));
    ws.spec.vocab_size = static_cast<int>(ws.words.size());
    ws.embedding = embeddings_for(cfg, ws.words, ws.spec.embedding_dim);
    ws.spec.embedding_dim = static_cast<int>(ws.embedding.dim());
    ws.meta.vocab = ws.words.tokens();
    ws.meta.fields["vocab_kind"] = "word";
    ws.meta.fields["vocab_fingerprint"] = hex64(ws.words.fingerprint());
  }
  ws.spec.validate();
  return ws;
}

double accuracy_of(const Model& model, std::span<const EncodedArticle> data) {
  if (data.empty()) return 0.0;
  const auto p = predict(model, data);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < data.size(); ++i) ok += p.labels[i] == data[i].label ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen_synthetic(const fs::path& out_dir, std::uint64_t seed, std::size_t count,
                      std::ostream& out) {
  SyntheticOptions opt;
  opt.seed = seed;
  opt.count = count;
  const auto files = write_synthetic(out_dir, opt);
  out << "corpus=" << files.corpus.string() << '\n'
      << "embeddings=" << files.embeddings.string() << '\n'
      << "wordpiece_vocab=" << files.wordpiece_vocab.string() << '\n'
      << "config=" << files.config.string() << '\n';
  return 0;
}

struct LengthStats {
  double mean = 0.0, stddev = 0.0;
  int chosen = 0;
  std::size_t truncated = 0;
};

LengthStats length_stats(const std::vector<int>& lengths) {
  LengthStats s;
  for (int v : lengths) s.mean += v;
  s.mean /= static_cast<double>(lengths.size());
  for (int v : lengths) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(lengths.size()));
  s.chosen = compute_max_len(lengths);
  for (int v : lengths) s.truncated += v > s.chosen ? 1 : 0;
  return s;
}

int cmd_preprocess(const RunConfig& cfg, std::ostream& out) {
  if (cfg.dataset.empty()) throw ConfigError("data.dataset is not set");
  const auto articles = load_dataset_csv(cfg.resolve(cfg.dataset));
  const auto split = holdout_split(articles.size(), cfg.seed);
  std::vector<std::string> split_of(articles.size());
  for (auto i : split.fit) split_of[i] = "fit";
  for (auto i : split.validation) split_of[i] = "validation";
  for (auto i : split.test) split_of[i] = "test";

  std::vector<std::vector<std::string>> title_tokens(articles.size()), body_tokens(articles.size());
  for (std::size_t i = 0; i < articles.size(); ++i) {
    title_tokens[i] = tokenize_basic(articles[i].title);
    body_tokens[i] = tokenize_basic(articles[i].body);
  }

  // Vocabulary and lengths come from the training part only.
  std::vector<std::vector<std::string>> train_docs;
  std::vector<int> title_lengths, body_lengths;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (split_of[i] == "test") continue;
    train_docs.push_back(title_tokens[i]);
    train_docs.push_back(body_tokens[i]);
    title_lengths.push_back(static_cast<int>(title_tokens[i].size()));
    body_lengths.push_back(static_cast<int>(body_tokens[i].size()));
  }
  const auto vocab = Vocabulary::build(train_docs, cfg.max_vocab);
  const auto title_stats = length_stats(title_lengths);
  const auto body_stats = length_stats(body_lengths);

  WordPieceVocab pieces;
  if (!cfg.wordpiece_vocab.empty()) {
    pieces = WordPieceVocab::load(cfg.resolve(cfg.wordpiece_vocab));
  } else {
    std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
    tokens.insert(tokens.end(), vocab.tokens().begin(), vocab.tokens().end());
    pieces = WordPieceVocab::from_tokens(std::move(tokens));
  }
  RunConfig tcfg = cfg;
  tcfg.architecture = Architecture::transformer;
  const int pair_len = tcfg.model_spec().max_len;

  const fs::path work = cfg.work();
  fs::create_directories(work);
  vocab.save(work / kVocabFile);
  pieces.save(work / kWordPieceFile);

  std::ostringstream ids, pairs, concat;
  ids << "# format=ids vocab_fingerprint=" << hex64(vocab.fingerprint()) << " title_len=" << title_stats.chosen
      << " body_len=" << body_stats.chosen << " split_seed=" << cfg.seed << '\n';
  pairs << "# format=pairs vocab_fingerprint=" << hex64(pieces.fingerprint()) << " max_len=" << pair_len
        << " split_seed=" << cfg.seed << '\n';
  concat << "id,split,label,text\r\n";
  std::size_t pair_truncated = 0;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    const auto& a = articles[i];
    const std::string id = clean_field(a.id);
    ids << id << '\t' << split_of[i] << '\t' << a.label << '\t'
        << join_ids(encode(title_tokens[i], vocab, title_stats.chosen)) << '\t'
        << join_ids(encode(body_tokens[i], vocab, body_stats.chosen)) << '\n';
    const auto pair = encode_pair(a.title, a.body, pieces, static_cast<std::size_t>(pair_len));
    if (wordpiece_tokenize(a.title, pieces).size() + wordpiece_tokenize(a.body, pieces).size() + 3 >
        static_cast<std::size_t>(pair_len)) {
      ++pair_truncated;
    }
    pairs << id << '\t' << split_of[i] << '\t' << a.label << '\t' << join_ids(pair) << '\n';
    concat << csv_escape(a.id) << ',' << split_of[i] << ',' << (a.label == kTrue ? "true" : "fake") << ','
           << csv_escape(a.title + " " + a.body) << "\r\n";
  }
  write_file(work / kIdsFile, ids.str());
  write_file(work / kPairsFile, pairs.str());
  write_file(work / "concatenated.csv", concat.str());

  const double n_train = static_cast<double>(title_lengths.size());
  std::ostringstream stats;
  stats << "articles=" << articles.size() << '\n'
        << "fit=" << split.fit.size() << '\n'
        << "validation=" << split.validation.size() << '\n'
        << "test=" << split.test.size() << '\n'
        << "vocab_size=" << vocab.size() << '\n'
        << "wordpiece_vocab_size=" << pieces.size() << '\n'
        << "title_length_mean=" << fmt(title_stats.mean) << '\n'
        << "title_length_stddev=" << fmt(title_stats.stddev) << '\n'
        << "title_len=" << title_stats.chosen << '\n'
        << "title_truncated=" << title_stats.truncated << '\n'
        << "title_truncated_fraction=" << fmt(static_cast<double>(title_stats.truncated) / n_train) << '\n'
        << "body_length_mean=" << fmt(body_stats.mean) << '\n'
        << "body_length_stddev=" << fmt(body_stats.stddev) << '\n'
        << "body_len=" << body_stats.chosen << '\n'
        << "body_truncated=" << body_stats.truncated << '\n'
        << "body_truncated_fraction=" << fmt(static_cast<double>(body_stats.truncated) / n_train) << '\n'
        << "pair_max_len=" << pair_len << '\n'
        << "pair_truncated_fraction="
        << fmt(static_cast<double>(pair_truncated) / static_cast<double>(articles.size())) << '\n';
  write_file(work / "stats.txt", stats.str());
  out << stats.str();
  return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  auto ws = open_workspace(cfg);
  const auto fit = ws.data.part("fit");
  const auto validation = ws.data.part("validation");
  const auto test = ws.data.part("test");
  Rng init(cfg.seed);
  auto model = build_model(ws.spec, &ws.embedding.weights, init);

  const auto hp = cfg.hyperparameters();
  TrainOptions opt;
  opt.max_epochs = cfg.max_epochs;
  opt.patience = cfg.patience;
  opt.seed = cfg.seed;
  opt.on_epoch = [&](const EpochStats& e) {
    out << "epoch " << e.epoch << " train_loss=" << fmt(e.train_loss)
        << " validation_accuracy=" << fmt(e.validation_accuracy) << '\n';
  };
  const auto report = train(*model, fit, validation, hp, opt);

  fs::create_directories(out_dir);
  std::ostringstream summary;
  summary << "architecture=" << architecture_name(cfg.architecture) << '\n'
          << "seed=" << cfg.seed << '\n'
          << "optimizer=" << optimizer_name(hp.optimizer) << '\n'
          << "learning_rate=" << fmt(hp.learning_rate) << '\n'
          << "momentum=" << fmt(hp.momentum) << '\n'
          << "batch_size=" << hp.batch_size << '\n'
          << "clip_norm=" << fmt(hp.clip_norm) << '\n'
          << report.summary();
  if (cfg.architecture != Architecture::transformer) {
    summary << "embeddings_found=" << ws.embedding.found << '\n'
            << "embeddings_missing=" << ws.embedding.missing << '\n';
  }
  if (!test.empty()) summary << "test_accuracy=" << fmt(accuracy_of(*model, test)) << '\n';
  write_file(out_dir / "train_log.txt", report.log());
  write_file(out_dir / "train_report.txt", summary.str());

  ws.meta.fields["seed"] = std::to_string(cfg.seed);
  ws.meta.fields["split_seed"] = ws.data.get("split_seed");
  save_checkpoint(out_dir / "checkpoint.bin", *model, ws.meta);
  out << summary.str() << "checkpoint=" << (out_dir / "checkpoint.bin").string() << '\n';
  return 0;
}

int cmd_tune(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  auto ws = open_workspace(cfg);
  const auto fit = ws.data.part("fit");
  const auto validation = ws.data.part("validation");
  const auto space = cfg.search_space();
  space.validate();

  int evaluation = 0;
  const Objective objective = [&](const Eigen::VectorXd& x) {
    ++evaluation;
    Hyperparameters hp = cfg.hyperparameters();
    ModelSpec spec = ws.spec;
    for (std::size_t j = 0; j < space.size(); ++j) {
      apply_tuned_value(space.dims[j].name, x(static_cast<Eigen::Index>(j)), space.dims[j].kind, hp, spec);
    }
    spec.validate();
    hp.validate();
    Rng init(cfg.seed);
    auto model = build_model(spec, &ws.embedding.weights, init);
    TrainOptions opt;
    opt.max_epochs = cfg.tune_epochs;
    opt.patience = cfg.patience;
    opt.seed = cfg.seed;
    double acc = std::numeric_limits<double>::quiet_NaN();
    try {
      acc = train(*model, fit, validation, hp, opt).best_validation_accuracy;
    } catch (const DivergenceError&) {
    }
    out << "evaluation " << evaluation << " objective=" << fmt(acc) << '\n';
    return acc;
  };
  const auto result = tune(objective, space, cfg.tune_n_init, cfg.tune_budget, cfg.seed);

  fs::create_directories(out_dir);
  write_file(out_dir / "tune_history.csv", history_csv(result, space));
  std::ostringstream best;
  for (std::size_t j = 0; j < space.size(); ++j) {
    best << space.dims[j].name << '=' << fmt(result.best_point(static_cast<Eigen::Index>(j))) << '\n';
  }
  best << "objective=" << fmt(result.best_objective) << '\n';
  write_file(out_dir / "best_params.txt", best.str());
  out << best.str();
  return 0;
}

int cmd_evaluate(const std::optional<RunConfig>& cfg, const fs::path& checkpoint, fs::path data,
                 const std::string& split, const fs::path& out_dir, std::ostream& out) {
  const auto ck = load_checkpoint(checkpoint);
  const auto enc = TextEncoder::from_checkpoint(ck);
  std::vector<EncodedArticle> rows;
  if (data.empty()) {
    if (!cfg) throw ConfigError("evaluate needs --data or --config");
    data = cfg->work() / (enc.arch == Architecture::transformer ? kPairsFile : kIdsFile);
  }
  if (data.extension() == ".csv") {
    for (const auto& a : load_dataset_csv(data)) rows.push_back(enc.encode_article(a));
  } else {
    const auto set = read_encoded(data);
    const bool pairs = set.get("format") == "pairs";
    if (pairs != (enc.arch == Architecture::transformer)) {
      throw DataError("manifest mismatch: " + data.string() + " is the wrong encoding for this model");
    }
    if (set.get("vocab_fingerprint") != hex64(enc.fingerprint())) {
      throw DataError("manifest mismatch: " + data.string() + " was encoded with a different vocabulary");
    }
    const bool lengths_ok = pairs ? std::stoi(set.get("max_len")) == enc.max_len
                                  : std::stoi(set.get("title_len")) == enc.title_len &&
                                        std::stoi(set.get("body_len")) == enc.body_len;
    if (!lengths_ok) throw DataError("manifest mismatch: sequence lengths differ from the checkpoint");
    rows = set.part(split);
  }
  if (rows.empty()) throw DataError("no rows to evaluate in split '" + split + "'");

  const auto preds = predict(*ck.model, rows);
  std::vector<int> truth;
  for (const auto& r : rows) truth.push_back(r.label);
  const auto report = evaluate(preds.p_true, preds.labels, truth);
  fs::create_directories(out_dir);
  const std::string text = "split=" + split + "\n" + report.to_key_value() + "loss=" + fmt(preds.loss) + "\n";
  write_file(out_dir / "eval_report.txt", text);
  write_file(out_dir / "roc.csv", report.roc_csv());
  out << text;
  return 0;
}

int cmd_predict(const fs::path& checkpoint, const std::string& title, const std::string& body,
                std::ostream& out) {
  const auto ck = load_checkpoint(checkpoint);
  const auto enc = TextEncoder::from_checkpoint(ck);
  Article a;
  a.title = title;
  a.body = body;
  const std::vector<EncodedArticle> batch = {enc.encode_article(a)};
  const auto probs = ck.model->forward(batch).value();
  const double p_fake = probs(0, 0), p_true = probs(0, 1);
  out << "p_fake=" << fmt(p_fake) << '\n'
      << "p_true=" << fmt(p_true) << '\n'
      << "label=" << (p_true > p_fake ? "true" : "fake") << '\n';
  return 0;
}

void set_threads() {
  int n = 1;
  if (const char* env = std::getenv("HOAXNET_THREADS")) {
    try {
      n = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw ConfigError(std::string("HOAXNET_THREADS must be a positive integer, got '") + env + "'");
    }
  }
  Eigen::setNbThreads(n);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fake-news classification toolkit", "hoaxnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hoaxnet 1.0");

  std::string config_path, arch, out_dir, checkpoint, data, split = "test", title, body;
  std::optional<std::uint64_t> seed;
  std::size_t count = 2000;
  const auto arch_check = CLI::IsMember({"lstm", "cnn", "transformer"});

  auto* gen = app.add_subcommand("gen-synthetic", "write a seeded synthetic corpus");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--count", count, "number of articles")->check(CLI::PositiveNumber);

  auto with_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--config", config_path, "run config file");
    if (required) opt->required();
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--arch", arch, "lstm|cnn|transformer")->check(arch_check);
    sub->add_option("--out", out_dir, "output directory (default: paths.work)");
  };
  auto* pre = app.add_subcommand("preprocess", "build vocabulary and encoded datasets");
  with_config(pre, true);
  auto* tun = app.add_subcommand("tune", "Bayesian hyperparameter search");
  with_config(tun, true);
  auto* trn = app.add_subcommand("train", "train a model and write a checkpoint");
  with_config(trn, true);
  auto* evl = app.add_subcommand("evaluate", "score a checkpoint on a dataset");
  with_config(evl, false);
  evl->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  evl->add_option("--data", data, "encoded .tsv or raw .csv (default: work dir encoding)");
  evl->add_option("--split", split, "fit|validation|test|all")
      ->check(CLI::IsMember({"fit", "validation", "test", "all"}));
  auto* prd = app.add_subcommand("predict", "classify one article");
  prd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  prd->add_option("--title", title, "article title");
  prd->add_option("--body", body, "article body");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    set_threads();
    auto load_config = [&]() -> std::optional<RunConfig> {
      if (config_path.empty()) return std::nullopt;
      RunConfig cfg = RunConfig::load(config_path);
      if (seed) cfg.seed = *seed;
      if (!arch.empty()) cfg.architecture = parse_architecture(arch);
      return cfg;
    };
    auto output_dir = [&](const RunConfig& cfg) { return out_dir.empty() ? cfg.work() : fs::path(out_dir); };

    if (gen->parsed()) return cmd_gen_synthetic(out_dir, seed.value_or(1), count, out);
    if (prd->parsed()) return cmd_predict(checkpoint, title, body, out);
    const auto cfg = load_config();
    if (pre->parsed()) {
      RunConfig c = *cfg;
      if (!out_dir.empty()) c.work_dir = fs::absolute(out_dir);
      return cmd_preprocess(c, out);
    }
    if (trn->parsed()) return cmd_train(*cfg, output_dir(*cfg), out);
    if (tun->parsed()) return cmd_tune(*cfg, output_dir(*cfg), out);
    if (evl->parsed()) {
      const fs::path dir = !out_dir.empty() ? fs::path(out_dir) : cfg ? cfg->work() : fs::path(".");
      return cmd_evaluate(cfg, checkpoint, data, split, dir, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace hoaxnet
