#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "segtron/tokenizer.hpp"
#include "segtron/vocab.hpp"

namespace segtron {

// Fixed encoding; T=6 everywhere downstream.
enum class Tag : int { B = 0, M = 1, E = 2, S = 3, Start = 4, End = 5 };

inline constexpr int kTagCount = 6;

using TagSequence = std::vector<Tag>;

char tag_letter(Tag t);
std::string tag_string(const TagSequence& tags);  // interior letters only, e.g. "BMESBEBE"

// A sentence partitioned into words; concatenation of words is the sentence.
struct Segmentation {
  std::vector<std::u32string> words;

  std::u32string chars() const;
  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

Segmentation segmentation_from_utf8(const std::vector<std::string>& words);

// Tokenized sentence with [CLS]/[SEP] attached and a tag per token
// (START aligned to [CLS], END to [SEP]).
struct AlignedExample {
  TokenizedSentence tokenized;
  TagSequence tags;
};

// Per-character tags: 1-char word -> S, k-char word -> B M^(k-2) E.
TagSequence source_tags(const Segmentation& seg);

// Adds [CLS]/[SEP] with empty spans at the ends.
TokenizedSentence with_sentinels(TokenizedSentence ts, const Vocabulary& vocab);

// Per-token tags: each word is tokenized independently and its tokens are
// tagged by position within the word (single token -> S, otherwise B..M..E).
// Consecutive non-CJK chunks of one word separated by whitespace get one
// [unused1] token with an empty span between them.
AlignedExample align_tags(const Segmentation& seg, const Vocabulary& vocab);

// Inverse of align_tags at character level: a word opens before every token
// tagged B or S and closes before the next opener or at END. Invalid tag
// strings are repaired deterministically (M/E with no open word start one).
// Throws DataError on length mismatch.
Segmentation decode_tags(const TokenizedSentence& ts, const TagSequence& tags);

// True iff tags form START (valid BMES string) END with no interior START/END.
bool validate_tag_string(const TagSequence& tags);

// align_tags with the overflow rule: examples whose token count (with
// sentinels) exceeds max_seq_len are split at the last word boundary that
// fits; a single over-long word is split mid-word into valid sub-words.
std::vector<AlignedExample> align_tags_split(const Segmentation& seg, const Vocabulary& vocab,
                                             std::size_t max_seq_len);

// Inference-side overflow split for a plain tokenized sentence; pieces break
// preferably before a chunk-initial token.
std::vector<TokenizedSentence> split_tokenized(const TokenizedSentence& ts,
                                               const Vocabulary& vocab,
                                               std::size_t max_seq_len);

}  // namespace segtron
