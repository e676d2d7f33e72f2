#pragma once

#include <string>
#include <string_view>

namespace segtron {

// Decodes UTF-8 into Unicode scalar values. Throws DataError on malformed
// input (overlong forms, surrogates, truncated sequences).
std::u32string utf8_decode(std::string_view bytes);

std::string utf8_encode(std::u32string_view text);
std::string utf8_encode(char32_t c);

// CJK Unified Ideographs plus Extension A.
bool is_cjk_ideograph(char32_t c);

// CJK Symbols and Punctuation block (U+3000..U+303F).
bool is_cjk_punct(char32_t c);

// Characters the tokenizer isolates as single-character chunks.
// Full-width Latin/digits are deliberately excluded so they can merge
// into multi-character chunks like their narrow counterparts.
bool is_chunk_isolated(char32_t c);

// Whitespace for chunk splitting and corpus parsing: ASCII space/tab/CR/LF
// and the ideographic space U+3000.
bool is_space(char32_t c);

bool is_digit_char(char32_t c);    // 0-9 and full-width ０-９
bool is_latin_letter(char32_t c);  // A-Za-z and full-width Ａ-Ｚａ-ｚ

}  // namespace segtron
