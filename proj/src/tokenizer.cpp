#include "segtron/tokenizer.hpp"

#include "segtron/errors.hpp"
#include "segtron/unicode.hpp"

namespace segtron {

std::vector<Chunk> split_chunks(std::u32string_view text) {
  std::vector<Chunk> chunks;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    if (is_chunk_isolated(text[i])) {
      chunks.push_back({i, i + 1});
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && !is_space(text[j]) && !is_chunk_isolated(text[j])) ++j;
    chunks.push_back({i, j});
    i = j;
  }
  return chunks;
}

std::vector<TokenRef> wordpiece_chunk(std::u32string_view chunk_text, std::size_t offset,
                                      const Vocabulary& vocab, bool* unknown) {
  const std::size_t n = chunk_text.size();
  std::vector<TokenRef> out;
  if (n == 0) return out;
  if (n > kMaxChunkChars) {
    if (unknown) *unknown = true;
    out.push_back({vocab.unk_id(), {offset, offset + n}});
    return out;
  }
  const std::string& prefix = vocab.continuation_prefix();
  std::size_t start = 0;
  std::vector<TokenRef> pieces;
  while (start < n) {
    // Longest-match-first: shrink the candidate until it is in the vocabulary.
    std::size_t end = n;
    int match = -1;
    while (start < end) {
      std::string cand = utf8_encode(chunk_text.substr(start, end - start));
      if (start > 0) cand = prefix + cand;
      match = vocab.id(cand);
      if (match >= 0) break;
      --end;
    }
    if (match < 0) {
      // No matchable prefix: the whole chunk becomes one [UNK].
      if (unknown) *unknown = true;
      out.push_back({vocab.unk_id(), {offset, offset + n}});
      return out;
    }
    pieces.push_back({match, {offset + start, offset + end}});
    start = end;
  }
  return pieces;
}

TokenizedSentence tokenize(std::u32string_view text, const Vocabulary& vocab) {
  TokenizedSentence ts;
  ts.chars.assign(text.begin(), text.end());
  const std::vector<Chunk> chunks = split_chunks(text);
  if (chunks.empty()) throw UsageError("tokenize: text is empty after trimming");
  for (const Chunk& c : chunks) {
    bool unk = false;
    auto pieces = wordpiece_chunk(text.substr(c.begin, c.end - c.begin), c.begin, vocab, &unk);
    ts.has_unknown = ts.has_unknown || unk;
    ts.tokens.insert(ts.tokens.end(), pieces.begin(), pieces.end());
  }
  return ts;
}

TokenizedSentence tokenize(std::string_view utf8_text, const Vocabulary& vocab) {
  return tokenize(utf8_decode(utf8_text), vocab);
}

std::vector<CharSpan> detokenize_spans(const TokenizedSentence& ts) {
  std::vector<CharSpan> spans;
  spans.reserve(ts.tokens.size());
  for (const TokenRef& t : ts.tokens) spans.push_back(t.span);
  return spans;
}

}  // namespace segtron
