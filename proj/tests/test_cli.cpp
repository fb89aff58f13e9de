#include <doctest.h>

#include <sstream>

#include "cli_support.hpp"
#include "hoaxnet/textpipe.hpp"
#include "support.hpp"

using testing::run;
using testing::slurp;

namespace {

struct Project {
  testing::TempDir dir{"cli"};
  std::filesystem::path conf = dir / "hoaxnet.conf";
  std::filesystem::path work = dir / "work";

  Project() {
    REQUIRE(run({"gen-synthetic", "--out", dir.path().string(), "--count", "300", "--seed", "4"}).code == 0);
    testing::append(conf, "train.max_epochs=2\ntune.budget=3\ntune.n_init=2\ntune.epochs=1\n");
    REQUIRE(run({"preprocess", "--config", conf.string()}).code == 0);
  }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"train", "--config", "/nonexistent/hoaxnet.conf"}).code == 2);

  testing::TempDir dir("cli-conf");
  testing::append(dir / "bad.conf", "model.arch=rnn\n");
  const auto r = run({"train", "--config", (dir / "bad.conf").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("rnn") != std::string::npos);
}

TEST_CASE("preprocess writes consistent artifacts") {
  Project p;
  for (const char* f : {"vocab.txt", "wordpiece_vocab.txt", "encoded_ids.tsv", "encoded_pairs.tsv",
                        "concatenated.csv", "stats.txt"}) {
    CHECK(std::filesystem::exists(p.work / f));
  }
  const auto stats = testing::key_values(slurp(p.work / "stats.txt"));
  CHECK(std::stoi(stats.at("articles")) == 300);
  const auto ids = slurp(p.work / "encoded_ids.tsv");
  CHECK(ids.rfind("# format=ids vocab_fingerprint=", 0) == 0);
  CHECK(std::count(ids.begin(), ids.end(), '\n') == 301);
}

TEST_CASE("stats truncation figures can be recounted from the raw corpus") {
  Project p;
  std::map<std::string, std::string> split_of;
  std::istringstream rows(slurp(p.work / "encoded_ids.tsv"));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    const auto tab = line.find('\t');
    split_of[line.substr(0, tab)] = line.substr(tab + 1, line.find('\t', tab + 1) - tab - 1);
  }
  std::vector<int> titles, bodies;
  for (const auto& a : hoaxnet::load_dataset_csv(p.dir / "corpus.csv")) {
    if (split_of.at(a.id) == "test") continue;
    titles.push_back(static_cast<int>(hoaxnet::tokenize_basic(a.title).size()));
    bodies.push_back(static_cast<int>(hoaxnet::tokenize_basic(a.body).size()));
  }
  const auto stats = testing::key_values(slurp(p.work / "stats.txt"));
  for (const auto& [name, lengths] : {std::pair{std::string("title"), titles}, std::pair{std::string("body"), bodies}}) {
    CAPTURE(name);
    const int l = hoaxnet::compute_max_len(lengths);
    CHECK(std::stoi(stats.at(name + "_len")) == l);
    const auto over = std::count_if(lengths.begin(), lengths.end(), [&](int n) { return n > l; });
    CHECK(std::stol(stats.at(name + "_truncated")) == over);
    CHECK(std::stod(stats.at(name + "_truncated_fraction")) ==
          doctest::Approx(static_cast<double>(over) / static_cast<double>(lengths.size())).epsilon(1e-8));
  }
}

TEST_CASE("train, evaluate and predict") {
  Project p;
  const auto trained = run({"train", "--config", p.conf.string(), "--arch", "cnn"});
  REQUIRE_MESSAGE(trained.code == 0, trained.err);
  const auto ckpt = (p.work / "checkpoint.bin").string();

  const auto ev = run({"evaluate", "--config", p.conf.string(), "--checkpoint", ckpt});
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  const auto kv = testing::key_values(slurp(p.work / "eval_report.txt"));
  CHECK(kv.at("split") == "test");
  const long n = std::stol(kv.at("samples"));
  CHECK(n == 90);
  CHECK(std::stol(kv.at("tn")) + std::stol(kv.at("fp")) + std::stol(kv.at("fn")) + std::stol(kv.at("tp")) == n);
  const auto roc = slurp(p.work / "roc.csv");
  CHECK(roc.rfind("fpr,tpr\n0,0\n", 0) == 0);
  CHECK(roc.substr(roc.size() - 4) == "1,1\n");

  const auto all = run({"evaluate", "--config", p.conf.string(), "--checkpoint", ckpt, "--split", "all"});
  CHECK(testing::key_values(all.out).at("samples") == "300");
  const auto raw = run({"evaluate", "--checkpoint", ckpt, "--data", (p.dir / "corpus.csv").string(),
                        "--out", (p.dir / "raw").string()});
  REQUIRE_MESSAGE(raw.code == 0, raw.err);
  CHECK(testing::key_values(raw.out).at("samples") == "300");

  for (const auto& [title, body] : std::vector<std::pair<std::string, std::string>>{
           {"shocking hoax exposed", "secret miracle banned viral"}, {"", ""}}) {
    const auto pr = run({"predict", "--checkpoint", ckpt, "--title", title, "--body", body});
    REQUIRE_MESSAGE(pr.code == 0, pr.err);
    const auto out = testing::key_values(pr.out);
    CHECK(std::stod(out.at("p_fake")) + std::stod(out.at("p_true")) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK((out.at("label") == "fake" || out.at("label") == "true"));
  }

  // A checkpoint paired with the other encoding is a manifest mismatch.
  const auto mismatch = run({"evaluate", "--checkpoint", ckpt, "--data", (p.work / "encoded_pairs.tsv").string()});
  CHECK(mismatch.code == 1);
  CHECK(mismatch.err.find("manifest mismatch") != std::string::npos);
}

TEST_CASE("a vocabulary change is detected") {
  Project p;
  REQUIRE(run({"train", "--config", p.conf.string(), "--arch", "lstm", "--out", (p.dir / "a").string()}).code == 0);
  testing::append(p.work / "vocab.txt", "zzzextra\n");
  const auto r = run({"train", "--config", p.conf.string(), "--arch", "lstm"});
  CHECK(r.code == 1);
  CHECK(r.err.find("different vocabulary") != std::string::npos);
}

TEST_CASE("transformer train and tune") {
  Project p;
  const auto t = run({"train", "--config", p.conf.string(), "--arch", "transformer"});
  REQUIRE_MESSAGE(t.code == 0, t.err);
  const auto report = testing::key_values(slurp(p.work / "train_report.txt"));
  CHECK(report.at("architecture") == "transformer");
  CHECK(report.at("optimizer") == "adam");

  const auto tuned = run({"tune", "--config", p.conf.string(), "--arch", "cnn"});
  REQUIRE_MESSAGE(tuned.code == 0, tuned.err);
  const auto history = slurp(p.work / "tune_history.csv");
  CHECK(history.rfind("iter,learning_rate,momentum,dropout_merge,objective\n", 0) == 0);
  CHECK(std::count(history.begin(), history.end(), '\n') == 4);
  CHECK(testing::key_values(slurp(p.work / "best_params.txt")).count("objective") == 1);
}
