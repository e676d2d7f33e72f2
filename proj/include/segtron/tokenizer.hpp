#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "segtron/vocab.hpp"

namespace segtron {

// Half-open character index range into TokenizedSentence::chars.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool empty() const { return begin == end; }
  std::size_t length() const { return end - begin; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct TokenRef {
  int id = -1;
  CharSpan span;
};

// Subword tokens with exact character-span provenance. Non-empty spans are
// sorted, non-overlapping, and jointly cover every non-whitespace character.
struct TokenizedSentence {
  std::u32string chars;
  std::vector<TokenRef> tokens;
  bool has_unknown = false;
};

// A maximal whitespace-free character run, with CJK characters isolated as
// single-character chunks.
struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Chunk> split_chunks(std::u32string_view text);

// Chunks longer than this become a single [UNK] token.
inline constexpr std::size_t kMaxChunkChars = 100;

// Greedy longest-match-first WordPiece over one chunk. `offset` shifts the
// produced spans into sentence coordinates. Sets *unknown when the chunk
// degrades to [UNK].
std::vector<TokenRef> wordpiece_chunk(std::u32string_view chunk_text, std::size_t offset,
                                      const Vocabulary& vocab, bool* unknown);

// WordPiece tokenization of one sentence. Pure function of (text, vocab);
// whitespace-separated chunks are tokenized independently and no [unused1]
// is emitted here (that token only exists for intra-word spaces known at
// tag-alignment time). Throws UsageError when text is empty after trimming.
TokenizedSentence tokenize(std::u32string_view text, const Vocabulary& vocab);
TokenizedSentence tokenize(std::string_view utf8_text, const Vocabulary& vocab);

// The span list in token order; empty-span tokens yield empty spans.
std::vector<CharSpan> detokenize_spans(const TokenizedSentence& ts);

}  // namespace segtron
