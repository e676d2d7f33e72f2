#pragma once

#include <set>
#include <string>
#include <vector>

#include "segtron/tagging.hpp"

namespace segtron {

struct Corpus {
  std::vector<Segmentation> sentences;
  std::string origin;        // train / test / raw
  std::size_t skipped_lines = 0;  // lines that collapsed to zero words
};

// Bakeoff format: UTF-8, one sentence per line, words separated by
// whitespace runs (ASCII space and ideographic space both accepted).
// Empty lines are skipped; a line collapsing to zero words is counted in
// skipped_lines. Throws DataError on undecodable bytes.
Corpus load_segmented(const std::string& path, const std::string& origin = "");

// Words joined by single ASCII spaces, one sentence per line.
void save_segmented(const Corpus& corpus, const std::string& path);

// Raw input: one unsegmented sentence per line (may be empty).
std::vector<std::u32string> load_raw_lines(const std::string& path);

// Every distinct character appearing in the corpus.
std::set<char32_t> corpus_charset(const Corpus& corpus);

// Distinct word surfaces, for OOV accounting.
std::set<std::u32string> corpus_lexicon(const Corpus& corpus);

}  // namespace segtron
