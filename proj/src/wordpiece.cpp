#include "hoaxnet/wordpiece.hpp"

#include <fstream>
#include <stdexcept>

#include "hoaxnet/textpipe.hpp"

namespace hoaxnet {

WordPieceVocab WordPieceVocab::from_tokens(std::vector<std::string> tokens) {
  WordPieceVocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<std::int32_t>(i)).second) {
      throw DataError("wordpiece vocab: duplicate entry '" + v.tokens_[i] + "' at line " +
                      std::to_string(i + 1));
    }
  }
  auto special = [&](std::string_view name) {
    auto id = v.find(name);
    if (!id) throw DataError("wordpiece vocab: missing " + std::string(name));
    return *id;
  };
  if (special(kPad) != 0) throw DataError("wordpiece vocab: [PAD] must be the first entry");
  v.unk_ = special(kUnk);
  v.cls_ = special(kCls);
  v.sep_ = special(kSep);
  return v;
}

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(std::move(tokens));
}

void WordPieceVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

std::optional<std::int32_t> WordPieceVocab::find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int32_t WordPieceVocab::id(std::string_view piece) const {
  return find(piece).value_or(unk_);
}

std::uint64_t WordPieceVocab::fingerprint() const {
  std::uint64_t h = fnv1a("wordpiece");
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a("\n", h);
  }
  return h;
}

std::vector<std::string> wordpiece_split(std::string_view word, const WordPieceVocab& vocab,
                                         std::size_t max_chars) {
  const std::string unk(WordPieceVocab::kUnk);
  if (word.empty()) return {};
  if (word.size() > max_chars) return {unk};

  std::vector<std::string> pieces;
  std::size_t start = 0;
  std::string candidate;
  while (start < word.size()) {
    std::size_t end = word.size();
    bool matched = false;
    while (end > start) {
      candidate.clear();
      if (start > 0) candidate += WordPieceVocab::kContinuation;
      candidate.append(word.substr(start, end - start));
      if (vocab.find(candidate)) {
        matched = true;
        break;
      }
      --end;
    }
    if (!matched) return {unk};
    pieces.push_back(candidate);
    start = end;
  }
  return pieces;
}

std::vector<std::string> wordpiece_tokenize(std::string_view text, const WordPieceVocab& vocab) {
  std::vector<std::string> out;
  for (const auto& word : tokenize_basic(text)) {
    auto pieces = wordpiece_split(word, vocab);
    out.insert(out.end(), std::make_move_iterator(pieces.begin()),
               std::make_move_iterator(pieces.end()));
  }
  return out;
}

std::vector<std::int32_t> encode_pair(std::string_view title, std::string_view body,
                                      const WordPieceVocab& vocab, std::size_t max_len) {
  if (max_len < 3) throw std::invalid_argument("encode_pair: max_len must be at least 3");
  const auto title_pieces = wordpiece_tokenize(title, vocab);
  const auto body_pieces = wordpiece_tokenize(body, vocab);

  // The body tail goes first; the title is cut only when it cannot fit on
  // its own next to the three framing tokens.
  const std::size_t room = max_len - 3;
  const std::size_t n_title = std::min(title_pieces.size(), room);
  const std::size_t n_body = std::min(body_pieces.size(), room - n_title);

  std::vector<std::int32_t> ids;
  ids.reserve(max_len);
  ids.push_back(vocab.cls_id());
  for (std::size_t i = 0; i < n_title; ++i) ids.push_back(vocab.id(title_pieces[i]));
  ids.push_back(vocab.sep_id());
  for (std::size_t i = 0; i < n_body; ++i) ids.push_back(vocab.id(body_pieces[i]));
  ids.push_back(vocab.sep_id());
  ids.resize(max_len, vocab.pad_id());
  return ids;
}

}  // namespace hoaxnet
