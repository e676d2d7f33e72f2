#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "segtron/corpus.hpp"

namespace segtron {

// Deterministic desk-scale corpus: a random lexicon over a private CJK
// codepoint range, sentences sampled as word sequences. Every emitted
// sentence has exactly one parse over the lexicon (enforced by rejection
// sampling), so the gold segmentation is recoverable from the surface.
struct SyntheticSpec {
  int alphabet_size = 50;
  std::vector<double> word_length_weights = {0.15, 0.45, 0.25, 0.15};  // lengths 1..4
  int lexicon_size = 200;
  int min_sentence_words = 5;
  int max_sentence_words = 15;
  int train_sentences = 2000;  // test split is ~1/9 of this (90/10 overall)
  std::uint64_t seed = 42;
  char32_t alphabet_base = U'一';
};

// Throws DataError when the alphabet cannot satisfy the unambiguity
// requirement within the retry budget.
std::pair<Corpus, Corpus> generate_synthetic(const SyntheticSpec& spec);

}  // namespace segtron
