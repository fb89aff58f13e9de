#pragma once

// Seeded synthetic news corpus with class-conditional marker words, plus
// matching embedding and WordPiece vocabulary files.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hoaxnet/textpipe.hpp"

namespace hoaxnet {

struct SyntheticOptions {
  std::size_t count = 2000;
  std::uint64_t seed = 1;
  int embedding_dim = 16;
  // Probability that a title carries a marker of its own class.
  double title_marker_rate = 0.7;
  // Probability that a body also carries one marker of the other class.
  double cross_marker_rate = 0.3;
  // Fraction of labels flipped after generation.
  double label_noise = 0.0;
};

const std::vector<std::string>& synthetic_filler_words();
const std::vector<std::string>& synthetic_markers(int label);

// Balanced in expectation; ids are "syn-<n>".
std::vector<Article> generate_corpus(const SyntheticOptions& options);

// "V M" header then one "word v1 ... vM" line per word the generator can emit.
std::string synthetic_embeddings(const SyntheticOptions& options);
// Special tokens, syllable pieces, continuation pieces, most filler words
// whole, and marker words.
std::vector<std::string> synthetic_wordpiece_tokens();

struct SyntheticFiles {
  std::filesystem::path corpus, embeddings, wordpiece_vocab, config;
};

// Writes corpus.csv, embeddings.txt, wordpiece_vocab.txt and hoaxnet.conf
// into `dir`, creating it if needed.
SyntheticFiles write_synthetic(const std::filesystem::path& dir, const SyntheticOptions& options);

}  // namespace hoaxnet
