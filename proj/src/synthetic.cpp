#include "hoaxnet/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hoaxnet/rng.hpp"

namespace hoaxnet {

namespace {

constexpr const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "ta", "vo", "shi",
                                      "den", "par", "gul", "tor", "bes", "fin", "wa", "zo"};

const std::vector<std::string> kFakeMarkers = {"shocking", "hoax",    "secret", "exposed",
                                               "miracle",  "unbelievable", "viral", "banned"};
const std::vector<std::string> kTrueMarkers = {"reported",  "according", "officials", "confirmed",
                                               "announced", "percent",   "statement", "quarterly"};

std::vector<std::string> make_fillers() {
  // Fixed stream: the filler lexicon does not depend on the corpus seed.
  Rng rng(0x5111ab1e5ULL);
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < 160) {
    const std::size_t parts = 2 + rng.below(2);
    std::string w;
    for (std::size_t i = 0; i < parts; ++i) w += kSyllables[rng.below(std::size(kSyllables))];
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("error writing " + path.string());
}

}  // namespace

const std::vector<std::string>& synthetic_filler_words() {
  static const std::vector<std::string> words = make_fillers();
  return words;
}

const std::vector<std::string>& synthetic_markers(int label) {
  return label == kTrue ? kTrueMarkers : kFakeMarkers;
}

std::vector<Article> generate_corpus(const SyntheticOptions& options) {
  if (options.count == 0) throw std::invalid_argument("generate_corpus: count must be positive");
  const auto& fillers = synthetic_filler_words();
  Rng rng(options.seed);
  auto filler = [&] { return fillers[rng.below(fillers.size())]; };
  auto marker = [&](int label) {
    const auto& m = synthetic_markers(label);
    return m[rng.below(m.size())];
  };
  auto insert_at_random = [&](std::vector<std::string>& words, std::string w) {
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)), std::move(w));
  };
  auto render = [&](const std::vector<std::string>& words, bool prose) {
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) text += (prose && rng.bernoulli(0.03)) ? "\n" : " ";
      std::string w = words[i];
      if (i == 0 && !w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
      text += w;
      if (prose && i + 1 < words.size() && rng.bernoulli(0.08)) text += ',';
    }
    text += prose ? "." : (rng.bernoulli(0.2) ? "!" : "");
    return text;
  };

  std::vector<Article> out;
  out.reserve(options.count);
  for (std::size_t n = 0; n < options.count; ++n) {
    Article a;
    a.id = "syn-" + std::to_string(n + 1);
    const int label = rng.bernoulli(0.5) ? kTrue : kFake;

    std::vector<std::string> title(4 + rng.below(6));
    for (auto& w : title) w = filler();
    if (rng.bernoulli(options.title_marker_rate)) title[rng.below(title.size())] = marker(label);

    std::vector<std::string> body(15 + rng.below(21));
    for (auto& w : body) w = filler();
    const std::size_t own = 2 + rng.below(3);
    for (std::size_t i = 0; i < own; ++i) insert_at_random(body, marker(label));
    if (rng.bernoulli(options.cross_marker_rate)) insert_at_random(body, marker(1 - label));

    a.title = render(title, false);
    a.body = render(body, true);
    a.label = rng.bernoulli(options.label_noise) ? 1 - label : label;
    out.push_back(std::move(a));
  }
  return out;
}

std::string synthetic_embeddings(const SyntheticOptions& options) {
  // Like pretrained vectors, related words share a direction: each marker
  // class sits around its own centroid, fillers around the origin.
  Rng rng(options.seed ^ 0xe3be11dULL);
  const int m = options.embedding_dim;
  auto centroid = [&] {
    std::vector<double> c(static_cast<std::size_t>(m));
    for (auto& v : c) v = rng.normal();
    return c;
  };
  const auto fake_center = centroid();
  const auto true_center = centroid();

  std::ostringstream out;
  out << synthetic_filler_words().size() + kFakeMarkers.size() + kTrueMarkers.size() << ' ' << m << '\n';
  char buf[32];
  auto emit = [&](const std::string& w, const std::vector<double>* center) {
    out << w;
    for (int j = 0; j < m; ++j) {
      const double base = center ? (*center)[static_cast<std::size_t>(j)] : 0.0;
      std::snprintf(buf, sizeof buf, " %.6f", base + 0.5 * rng.normal());
      out << buf;
    }
    out << '\n';
  };
  for (const auto& w : synthetic_filler_words()) emit(w, nullptr);
  for (const auto& w : kFakeMarkers) emit(w, &fake_center);
  for (const auto& w : kTrueMarkers) emit(w, &true_center);
  return out.str();
}

std::vector<std::string> synthetic_wordpiece_tokens() {
  std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  for (const char* s : kSyllables) tokens.emplace_back(s);
  for (const char* s : kSyllables) tokens.push_back("##" + std::string(s));
  // Most filler words are whole tokens, as frequent words are in a trained
  // vocabulary; every fourth one is left to split into pieces.
  const auto& fillers = synthetic_filler_words();
  for (std::size_t i = 0; i < fillers.size(); ++i) {
    if (i % 4 != 3) tokens.push_back(fillers[i]);
  }
  tokens.insert(tokens.end(), kFakeMarkers.begin(), kFakeMarkers.end());
  tokens.insert(tokens.end(), kTrueMarkers.begin(), kTrueMarkers.end());
  return tokens;
}

SyntheticFiles write_synthetic(const std::filesystem::path& dir, const SyntheticOptions& options) {
  std::filesystem::create_directories(dir);
  SyntheticFiles files{dir / "corpus.csv", dir / "embeddings.txt", dir / "wordpiece_vocab.txt",
                       dir / "hoaxnet.conf"};

  std::ostringstream csv;
  csv << "id,title,text,label\r\n";
  for (const auto& a : generate_corpus(options)) {
    csv << csv_escape(a.id) << ',' << csv_escape(a.title) << ',' << csv_escape(a.body) << ','
        << (a.label == kTrue ? "true" : "fake") << "\r\n";
  }
  write_file(files.corpus, csv.str());
  write_file(files.embeddings, synthetic_embeddings(options));

  std::string vocab;
  for (const auto& t : synthetic_wordpiece_tokens()) vocab += t + '\n';
  write_file(files.wordpiece_vocab, vocab);

  std::ostringstream conf;
  conf << "# generated by gen-synthetic\n"
       << "seed=" << options.seed << '\n'
       << "data.dataset=corpus.csv\n"
       << "data.embeddings=embeddings.txt\n"
       << "data.wordpiece_vocab=wordpiece_vocab.txt\n"
       << "paths.work=work\n"
       << "model.arch=lstm\n";
  write_file(files.config, conf.str());
  return files;
}

}  // namespace hoaxnet
