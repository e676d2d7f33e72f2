#include "segtron/vocab.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "segtron/errors.hpp"
#include "segtron/unicode.hpp"

namespace segtron {

namespace {

constexpr std::array<const char*, 5> kSpecials = {kPadToken, kUnkToken, kClsToken,
                                                  kSepToken, kSpaceToken};

bool is_special(std::string_view t) {
  for (const char* s : kSpecials) {
    if (t == s) return true;
  }
  return false;
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<std::string>& tokens) {
  Vocabulary v;
  v.entries_.reserve(tokens.size());
  for (const std::string& t : tokens) {
    if (t.empty() && !is_special(t)) {
      throw DataError("empty non-special vocabulary entry at id " +
                      std::to_string(v.entries_.size()));
    }
    auto [it, inserted] = v.id_of_.emplace(t, static_cast<int>(v.entries_.size()));
    if (!inserted) throw DataError("duplicate vocabulary token: " + t);
    v.entries_.push_back(t);
  }
  v.pad_ = v.id(kPadToken);
  v.unk_ = v.id(kUnkToken);
  v.cls_ = v.id(kClsToken);
  v.sep_ = v.id(kSepToken);
  v.space_ = v.id(kSpaceToken);
  for (const char* s : kSpecials) {
    if (v.id(s) < 0) throw DataError(std::string("vocabulary missing special token ") + s);
  }
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = id_of_.find(std::string(token));
  return it == id_of_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= entries_.size()) {
    throw UsageError("vocabulary id out of range: " + std::to_string(id));
  }
  return entries_[static_cast<std::size_t>(id)];
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    utf8_decode(line);  // validate encoding
    tokens.push_back(line);
  }
  return build(tokens);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const std::string& t : entries_) out << t << '\n';
  if (!out) throw DataError("failed writing vocabulary file: " + path);
}

Vocabulary build_char_vocabulary(const std::set<char32_t>& chars) {
  std::vector<std::string> tokens(kSpecials.begin(), kSpecials.end());
  for (char32_t c : chars) {
    if (is_space(c)) continue;
    tokens.push_back(utf8_encode(c));
  }
  for (char32_t c : chars) {
    if (is_space(c) || is_chunk_isolated(c)) continue;
    tokens.push_back(std::string(kContinuationPrefix) + utf8_encode(c));
  }
  return Vocabulary::build(tokens);
}

}  // namespace segtron
