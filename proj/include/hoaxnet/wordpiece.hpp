#pragma once

// WordPiece subword splitting and [CLS] title [SEP] body [SEP] framing.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hoaxnet {

class WordPieceVocab {
 public:
  static constexpr std::string_view kPad = "[PAD]";
  static constexpr std::string_view kUnk = "[UNK]";
  static constexpr std::string_view kCls = "[CLS]";
  static constexpr std::string_view kSep = "[SEP]";
  // Prefix marking a piece that continues a word.
  static constexpr std::string_view kContinuation = "##";

  WordPieceVocab() = default;

  // id = position in the list. [PAD] must be id 0 and each special token
  // must appear exactly once.
  static WordPieceVocab from_tokens(std::vector<std::string> tokens);
  static WordPieceVocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<std::int32_t> find(std::string_view piece) const;
  std::int32_t id(std::string_view piece) const;  // [UNK] id when absent
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }

  std::int32_t pad_id() const { return 0; }
  std::int32_t unk_id() const { return unk_; }
  std::int32_t cls_id() const { return cls_; }
  std::int32_t sep_id() const { return sep_; }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::int32_t unk_ = -1, cls_ = -1, sep_ = -1;
};

// Greedy longest-match-first. Words longer than max_chars, or with any
// unmatched remainder, collapse to a single [UNK].
std::vector<std::string> wordpiece_split(std::string_view word, const WordPieceVocab& vocab,
                                         std::size_t max_chars = 100);

// Basic tokenization followed by wordpiece_split on every token.
std::vector<std::string> wordpiece_tokenize(std::string_view text, const WordPieceVocab& vocab);

// [CLS] title [SEP] body [SEP], padded with [PAD] to exactly max_len ids.
std::vector<std::int32_t> encode_pair(std::string_view title, std::string_view body,
                                      const WordPieceVocab& vocab, std::size_t max_len);

}  // namespace hoaxnet
