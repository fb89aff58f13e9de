#include "hoaxnet/textpipe.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace hoaxnet {

namespace {

const std::string kPadToken = "[PAD]";
const std::string kOovToken = "[OOV]";

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.index_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    const auto id = static_cast<std::int32_t>(i) + kFirstToken;
    if (!v.index_.emplace(v.tokens_[i], id).second) {
      throw DataError("vocabulary: duplicate token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> documents,
                             std::size_t max_tokens) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (max_tokens > 0 && ranked.size() > max_tokens) ranked.resize(max_tokens);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, n] : ranked) tokens.push_back(std::move(tok));
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kOov : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id == kPad) return kPadToken;
  if (id == kOov) return kOovToken;
  if (id < kFirstToken || static_cast<std::size_t>(id) >= size()) {
    throw std::out_of_range("vocabulary id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id - kFirstToken)];
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = fnv1a("vocab");
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Tokenization and encoding

std::vector<std::string> tokenize_basic(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i, e = j;
    while (b < e && is_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) out.push_back(lower(text.substr(b, e - b)));
    i = j;
  }
  return out;
}

int compute_max_len(std::span<const int> lengths) {
  if (lengths.empty()) throw std::invalid_argument("compute_max_len: empty length list");
  double mean = 0.0;
  for (int n : lengths) mean += n;
  mean /= static_cast<double>(lengths.size());
  double var = 0.0;
  for (int n : lengths) var += (n - mean) * (n - mean);
  var /= static_cast<double>(lengths.size());
  const long l = std::lround(mean + 2.0 * std::sqrt(var));
  return static_cast<int>(std::max(1L, l));
}

std::vector<std::int32_t> encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                                 int length) {
  if (length < 1) throw std::invalid_argument("encode: length must be positive");
  std::vector<std::int32_t> ids(static_cast<std::size_t>(length), Vocabulary::kPad);
  const std::size_t n = std::min(tokens.size(), ids.size());
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.id(tokens[i]);
  return ids;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  bool after_quote = false;
  bool any = false;
  std::size_t record_no = 1;
  auto fail = [&](const std::string& what) {
    throw DataError("csv record " + std::to_string(record_no) + ": " + what);
  };
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    was_quoted = after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    ++record_no;
    any = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == ',') {
      end_field();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      if (any || !field.empty() || after_quote || !record.empty()) end_record();
    } else if (after_quote) {
      fail("unexpected character after closing quote");
    } else if (c == '"') {
      if (!field.empty() || was_quoted) fail("quote inside unquoted field");
      in_quotes = was_quoted = true;
      any = true;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (in_quotes) fail("unterminated quoted field");
  if (any || !field.empty() || after_quote || !record.empty()) end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<Article> parse_dataset_csv(std::istream& in) {
  const auto records = parse_csv(in);
  if (records.empty()) throw DataError("dataset: missing header row");
  const auto& header = records.front();
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (lower(header[i]) == name) return i;
    }
    throw DataError("dataset: missing column '" + std::string(name) + "'");
  };
  const std::size_t id_col = column("id"), title_col = column("title"), text_col = column("text"),
                    label_col = column("label");

  std::vector<Article> articles;
  articles.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw DataError("dataset row " + std::to_string(r) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(rec.size()));
    }
    Article a;
    a.id = rec[id_col];
    a.title = rec[title_col];
    a.body = rec[text_col];
    const std::string label = lower(rec[label_col]);
    if (label == "fake") {
      a.label = kFake;
    } else if (label == "true") {
      a.label = kTrue;
    } else {
      throw DataError("dataset row " + std::to_string(r) + ": unknown label '" + rec[label_col] +
                      "'");
    }
    articles.push_back(std::move(a));
  }
  return articles;
}

std::vector<Article> load_dataset_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_dataset_csv(in);
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingMatrix parse_embeddings(std::istream& in, const Vocabulary& vocab) {
  std::vector<std::pair<std::int32_t, std::vector<float>>> rows;
  Index dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<float> values;
    std::string num;
    while (fields >> num) {
      float v = 0.0f;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (ec != std::errc() || ptr != num.data() + num.size()) {
        throw DataError("embeddings line " + std::to_string(line_no) + ": bad number '" + num + "'");
      }
      values.push_back(v);
    }
    // Optional "V M" header.
    if (line_no == 1 && values.size() == 1 &&
        std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
      dim = static_cast<Index>(values[0]);
      continue;
    }
    if (dim < 0) dim = static_cast<Index>(values.size());
    if (static_cast<Index>(values.size()) != dim || dim == 0) {
      throw DataError("embeddings line " + std::to_string(line_no) + ": dimension " +
                      std::to_string(values.size()) + ", expected " + std::to_string(dim));
    }
    const std::int32_t id = vocab.id(token);
    if (id >= Vocabulary::kFirstToken) rows.emplace_back(id, std::move(values));
  }
  if (dim <= 0) throw DataError("embeddings: no vectors found");

  EmbeddingMatrix e;
  e.weights = Matrix<float>::Zero(static_cast<Index>(vocab.size()), dim);
  std::vector<bool> seen(vocab.size(), false);
  for (const auto& [id, values] : rows) {
    e.weights.row(id) = Eigen::Map<const Eigen::RowVectorXf>(values.data(), dim);
    seen[static_cast<std::size_t>(id)] = true;
  }
  e.found = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  e.missing = vocab.tokens().size() - e.found;
  return e;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto in = open_input(path);
  return parse_embeddings(in, vocab);
}

}  // namespace hoaxnet
