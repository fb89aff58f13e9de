#pragma once

// Dataset ingestion and the fixed-length integer encoding used by the
// recurrent and convolutional classifiers.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hoaxnet/numerics.hpp"

namespace hoaxnet {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Label : int { kFake = 0, kTrue = 1 };

struct Article {
  std::string id;
  std::string title;
  std::string body;
  int label = kFake;
};

// Token ids: 0 is padding, 1 is out-of-vocabulary, real tokens start at 2.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kOov = 1;
  static constexpr std::int32_t kFirstToken = 2;

  Vocabulary() = default;

  // Most frequent first, ties broken lexicographically; max_tokens == 0
  // means no cap.
  static Vocabulary build(std::span<const std::vector<std::string>> documents,
                          std::size_t max_tokens);
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // One token per line; line k (0-based) holds id k + 2.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::int32_t id(std::string_view token) const;
  // "[PAD]" / "[OOV]" for the reserved ids.
  const std::string& token(std::int32_t id) const;
  bool contains(std::string_view token) const;

  // Including the two reserved ids.
  std::size_t size() const { return tokens_.size() + kFirstToken; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct EncodedArticle {
  std::string id;
  std::vector<std::int32_t> title_ids;
  std::vector<std::int32_t> body_ids;
  // WordPiece encoding of the concatenated title and body; filled only for
  // the transformer input path.
  std::vector<std::int32_t> pair_ids;
  int label = kFake;
};

struct EmbeddingMatrix {
  Matrix<float> weights;  // V x M, row 0 zero
  std::size_t found = 0;
  std::size_t missing = 0;

  Index dim() const { return weights.cols(); }
};

// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation.
std::vector<std::string> tokenize_basic(std::string_view text);

// round(mean + 2 * population stddev), at least 1.
int compute_max_len(std::span<const int> lengths);

// Head-truncated and zero-padded to exactly `length` ids.
std::vector<std::int32_t> encode(std::span<const std::string> tokens, const Vocabulary& vocab,
                                 int length);

// RFC-4180 CSV with at least the columns id,title,text,label.
std::vector<Article> parse_dataset_csv(std::istream& in);
std::vector<Article> load_dataset_csv(const std::filesystem::path& path);

// Generic RFC-4180 reader used by the dataset loader.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);
std::string csv_escape(std::string_view field);

EmbeddingMatrix parse_embeddings(std::istream& in, const Vocabulary& vocab);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab);

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL);

}  // namespace hoaxnet
