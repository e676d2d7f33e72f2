#include "segtron/tagging.hpp"

#include <algorithm>

#include "segtron/errors.hpp"
#include "segtron/unicode.hpp"

namespace segtron {

char tag_letter(Tag t) {
  switch (t) {
    case Tag::B: return 'B';
    case Tag::M: return 'M';
    case Tag::E: return 'E';
    case Tag::S: return 'S';
    case Tag::Start: return '<';
    case Tag::End: return '>';
  }
  return '?';
}

std::string tag_string(const TagSequence& tags) {
  std::string s;
  for (Tag t : tags) {
    if (t == Tag::Start || t == Tag::End) continue;
    s.push_back(tag_letter(t));
  }
  return s;
}

std::u32string Segmentation::chars() const {
  std::u32string out;
  for (const auto& w : words) out += w;
  return out;
}

Segmentation segmentation_from_utf8(const std::vector<std::string>& words) {
  Segmentation seg;
  seg.words.reserve(words.size());
  for (const auto& w : words) seg.words.push_back(utf8_decode(w));
  return seg;
}

TagSequence source_tags(const Segmentation& seg) {
  TagSequence tags;
  for (const auto& w : seg.words) {
    if (w.empty()) throw DataError("segmentation contains an empty word");
    if (w.size() == 1) {
      tags.push_back(Tag::S);
    } else {
      tags.push_back(Tag::B);
      for (std::size_t i = 1; i + 1 < w.size(); ++i) tags.push_back(Tag::M);
      tags.push_back(Tag::E);
    }
  }
  return tags;
}

TokenizedSentence with_sentinels(TokenizedSentence ts, const Vocabulary& vocab) {
  const std::size_t n = ts.chars.size();
  std::vector<TokenRef> tokens;
  tokens.reserve(ts.tokens.size() + 2);
  tokens.push_back({vocab.cls_id(), {0, 0}});
  tokens.insert(tokens.end(), ts.tokens.begin(), ts.tokens.end());
  tokens.push_back({vocab.sep_id(), {n, n}});
  ts.tokens = std::move(tokens);
  return ts;
}

namespace {

bool is_cjk_chunk(std::u32string_view sentence, const Chunk& c) {
  return c.end - c.begin == 1 && is_chunk_isolated(sentence[c.begin]);
}

// Tokens of one word in sentence coordinates, [unused1] included.
std::vector<TokenRef> word_tokens(std::u32string_view word, std::size_t offset,
                                  const Vocabulary& vocab, bool* unknown) {
  std::vector<TokenRef> out;
  const std::vector<Chunk> chunks = split_chunks(word);
  for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
    const Chunk& c = chunks[ci];
    if (ci > 0) {
      const Chunk& prev = chunks[ci - 1];
      const bool gap = prev.end < c.begin;  // whitespace run between chunks
      if (gap && !is_cjk_chunk(word, prev) && !is_cjk_chunk(word, c)) {
        out.push_back({vocab.space_id(), {offset + prev.end, offset + prev.end}});
      }
    }
    auto pieces = wordpiece_chunk(word.substr(c.begin, c.end - c.begin), offset + c.begin,
                                  vocab, unknown);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

void tag_word_tokens(std::size_t count, TagSequence& tags) {
  if (count == 1) {
    tags.push_back(Tag::S);
    return;
  }
  tags.push_back(Tag::B);
  for (std::size_t i = 1; i + 1 < count; ++i) tags.push_back(Tag::M);
  tags.push_back(Tag::E);
}

struct WordGroup {
  std::vector<TokenRef> tokens;
};

std::vector<WordGroup> word_groups(const Segmentation& seg, const Vocabulary& vocab,
                                   std::u32string& chars, bool* unknown) {
  chars = seg.chars();
  std::vector<WordGroup> groups;
  groups.reserve(seg.words.size());
  std::size_t offset = 0;
  for (const auto& w : seg.words) {
    if (w.empty()) throw DataError("segmentation contains an empty word");
    WordGroup g;
    g.tokens = word_tokens(w, offset, vocab, unknown);
    if (g.tokens.empty()) throw DataError("word yields no tokens: '" + utf8_encode(w) + "'");
    groups.push_back(std::move(g));
    offset += w.size();
  }
  return groups;
}

}  // namespace

AlignedExample align_tags(const Segmentation& seg, const Vocabulary& vocab) {
  AlignedExample ex;
  bool unknown = false;
  auto groups = word_groups(seg, vocab, ex.tokenized.chars, &unknown);
  ex.tokenized.has_unknown = unknown;
  ex.tags.push_back(Tag::Start);
  ex.tokenized.tokens.push_back({vocab.cls_id(), {0, 0}});
  for (const auto& g : groups) {
    ex.tokenized.tokens.insert(ex.tokenized.tokens.end(), g.tokens.begin(), g.tokens.end());
    tag_word_tokens(g.tokens.size(), ex.tags);
  }
  const std::size_t n = ex.tokenized.chars.size();
  ex.tokenized.tokens.push_back({vocab.sep_id(), {n, n}});
  ex.tags.push_back(Tag::End);
  return ex;
}

Segmentation decode_tags(const TokenizedSentence& ts, const TagSequence& tags) {
  if (tags.size() != ts.tokens.size()) {
    throw DataError("decode_tags: " + std::to_string(tags.size()) + " tags for " +
                    std::to_string(ts.tokens.size()) + " tokens");
  }
  Segmentation seg;
  bool open = false;
  bool covered = false;
  std::size_t lo = 0, hi = 0;
  auto close = [&] {
    if (open && covered) seg.words.push_back(ts.chars.substr(lo, hi - lo));
    open = false;
    covered = false;
  };
  // Positions 0 and n-1 carry the START/END pins and are never decoded.
  for (std::size_t i = 1; i + 1 < ts.tokens.size(); ++i) {
    const Tag t = tags[i];
    if (t == Tag::B || t == Tag::S) close();  // B and S open unconditionally
    open = true;
    const CharSpan& sp = ts.tokens[i].span;
    if (!sp.empty()) {
      if (!covered) {
        lo = sp.begin;
        hi = sp.end;
        covered = true;
      } else {
        lo = std::min(lo, sp.begin);
        hi = std::max(hi, sp.end);
      }
    }
  }
  close();
  return seg;
}

bool validate_tag_string(const TagSequence& tags) {
  if (tags.size() < 2) return false;
  if (tags.front() != Tag::Start || tags.back() != Tag::End) return false;
  auto allowed = [](Tag a, Tag b) {
    switch (a) {
      case Tag::Start:
      case Tag::E:
      case Tag::S:
        return b == Tag::B || b == Tag::S || b == Tag::End;
      case Tag::B:
      case Tag::M:
        return b == Tag::M || b == Tag::E;
      case Tag::End:
        return false;
    }
    return false;
  };
  for (std::size_t i = 1; i + 1 < tags.size(); ++i) {
    if (tags[i] == Tag::Start || tags[i] == Tag::End) return false;
  }
  for (std::size_t i = 0; i + 1 < tags.size(); ++i) {
    if (!allowed(tags[i], tags[i + 1])) return false;
  }
  return true;
}

std::vector<AlignedExample> align_tags_split(const Segmentation& seg, const Vocabulary& vocab,
                                             std::size_t max_seq_len) {
  if (max_seq_len < 3) throw UsageError("max_seq_len must be at least 3");
  const std::size_t capacity = max_seq_len - 2;

  AlignedExample whole = align_tags(seg, vocab);
  if (whole.tokenized.tokens.size() <= max_seq_len) return {std::move(whole)};

  std::u32string chars;
  bool unknown = false;
  auto groups = word_groups(seg, vocab, chars, &unknown);

  // Slice over-long words into valid sub-words first.
  std::vector<std::vector<TokenRef>> units;
  for (auto& g : groups) {
    if (g.tokens.size() <= capacity) {
      units.push_back(std::move(g.tokens));
      continue;
    }
    for (std::size_t i = 0; i < g.tokens.size(); i += capacity) {
      const std::size_t count = std::min(capacity, g.tokens.size() - i);
      units.emplace_back(g.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         g.tokens.begin() + static_cast<std::ptrdiff_t>(i + count));
    }
  }

  std::vector<AlignedExample> pieces;
  AlignedExample cur;
  auto begin_piece = [&] {
    cur = AlignedExample{};
    cur.tokenized.chars = chars;
    cur.tokenized.has_unknown = unknown;
    cur.tokenized.tokens.push_back({vocab.cls_id(), {0, 0}});
    cur.tags.push_back(Tag::Start);
  };
  auto flush_piece = [&] {
    if (cur.tokenized.tokens.size() <= 1) return;
    const std::size_t n = chars.size();
    cur.tokenized.tokens.push_back({vocab.sep_id(), {n, n}});
    cur.tags.push_back(Tag::End);
    pieces.push_back(std::move(cur));
    begin_piece();
  };
  begin_piece();
  for (const auto& u : units) {
    if (cur.tokenized.tokens.size() - 1 + u.size() > capacity) flush_piece();
    cur.tokenized.tokens.insert(cur.tokenized.tokens.end(), u.begin(), u.end());
    tag_word_tokens(u.size(), cur.tags);
  }
  flush_piece();
  return pieces;
}

std::vector<TokenizedSentence> split_tokenized(const TokenizedSentence& ts,
                                               const Vocabulary& vocab,
                                               std::size_t max_seq_len) {
  if (max_seq_len < 3) throw UsageError("max_seq_len must be at least 3");
  const std::size_t capacity = max_seq_len - 2;
  if (ts.tokens.size() <= capacity) return {ts};

  const std::string& prefix = vocab.continuation_prefix();
  auto chunk_initial = [&](std::size_t i) {
    const std::string& tok = vocab.token(ts.tokens[i].id);
    return tok.rfind(prefix, 0) != 0;
  };

  std::vector<TokenizedSentence> pieces;
  std::size_t start = 0;
  while (start < ts.tokens.size()) {
    std::size_t end = std::min(start + capacity, ts.tokens.size());
    if (end < ts.tokens.size()) {
      std::size_t cut = end;
      while (cut > start + 1 && !chunk_initial(cut)) --cut;
      if (cut > start + 1) end = cut;
    }
    TokenizedSentence piece;
    piece.chars = ts.chars;
    piece.has_unknown = ts.has_unknown;
    piece.tokens.assign(ts.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                        ts.tokens.begin() + static_cast<std::ptrdiff_t>(end));
    pieces.push_back(std::move(piece));
    start = end;
  }
  return pieces;
}

}  // namespace segtron
