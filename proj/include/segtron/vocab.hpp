#pragma once

#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace segtron {

inline constexpr const char* kPadToken = "[PAD]";
inline constexpr const char* kUnkToken = "[UNK]";
inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";
inline constexpr const char* kSpaceToken = "[unused1]";
inline constexpr const char* kContinuationPrefix = "##";

// Token-string <-> dense integer id table. Immutable after construction,
// so instances are safe to share across threads.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Insertion order defines ids. Throws DataError on duplicates, missing
  // special tokens, or empty non-special entries.
  static Vocabulary build(const std::vector<std::string>& tokens);

  // One token per line, line number = id.
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  int id(std::string_view token) const;  // -1 when absent
  bool contains(std::string_view token) const { return id(token) >= 0; }
  const std::string& token(int id) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

  int pad_id() const { return pad_; }
  int unk_id() const { return unk_; }
  int cls_id() const { return cls_; }
  int sep_id() const { return sep_; }
  int space_id() const { return space_; }

  const std::string& continuation_prefix() const { return prefix_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, int> id_of_;
  std::string prefix_ = kContinuationPrefix;
  int pad_ = -1, unk_ = -1, cls_ = -1, sep_ = -1, space_ = -1;
};

// Specials, one single-character token per distinct character, and a
// continuation variant ("##c") for every non-CJK character so Latin and
// digit chunks never degrade to [UNK].
Vocabulary build_char_vocabulary(const std::set<char32_t>& chars);

}  // namespace segtron
