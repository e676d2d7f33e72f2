#include "segtron/corpus.hpp"

#include <fstream>
#include <sstream>

#include "segtron/errors.hpp"
#include "segtron/unicode.hpp"

namespace segtron {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::u32string> decode_lines(const std::string& bytes) {
  std::vector<std::u32string> lines;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string::npos) {
      if (start < bytes.size()) lines.push_back(utf8_decode(bytes.substr(start)));
      break;
    }
    lines.push_back(utf8_decode(bytes.substr(start, end - start)));
    start = end + 1;
  }
  for (auto& l : lines) {
    if (!l.empty() && l.back() == U'\r') l.pop_back();
  }
  return lines;
}

}  // namespace

Corpus load_segmented(const std::string& path, const std::string& origin) {
  Corpus corpus;
  corpus.origin = origin;
  bool saw_blank = false;
  for (const std::u32string& line : decode_lines(read_file(path))) {
    Segmentation seg;
    std::size_t i = 0;
    while (i < line.size()) {
      if (is_space(line[i])) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < line.size() && !is_space(line[j])) ++j;
      seg.words.push_back(line.substr(i, j - i));
      i = j;
    }
    if (seg.words.empty()) {
      // Fully empty lines are silently skipped; whitespace-only lines count
      // as skipped-with-warning.
      if (!line.empty()) corpus.skipped_lines += 1;
      saw_blank = saw_blank || line.empty();
      continue;
    }
    corpus.sentences.push_back(std::move(seg));
  }
  (void)saw_blank;
  return corpus;
}

void save_segmented(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  for (const Segmentation& seg : corpus.sentences) {
    for (std::size_t i = 0; i < seg.words.size(); ++i) {
      if (i > 0) out << ' ';
      out << utf8_encode(seg.words[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing file: " + path);
}

std::vector<std::u32string> load_raw_lines(const std::string& path) {
  return decode_lines(read_file(path));
}

std::set<char32_t> corpus_charset(const Corpus& corpus) {
  std::set<char32_t> chars;
  for (const auto& seg : corpus.sentences) {
    for (const auto& w : seg.words) chars.insert(w.begin(), w.end());
  }
  return chars;
}

std::set<std::u32string> corpus_lexicon(const Corpus& corpus) {
  std::set<std::u32string> lex;
  for (const auto& seg : corpus.sentences) {
    for (const auto& w : seg.words) lex.insert(w);
  }
  return lex;
}

}  // namespace segtron
