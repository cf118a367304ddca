#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace truecase {

using CodePoint = char32_t;

// Strict UTF-8 decoding; throws DataError on malformed input.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
void append_utf8(CodePoint cp, std::string& out);

// Case mapping restricted to bijective simple pairs (A<->a, Σ<->σ, ...).
// Characters outside such a pair are caseless: both maps return them as is.
CodePoint to_lower(CodePoint cp);
CodePoint to_upper(CodePoint cp);
bool is_upper(CodePoint cp);
bool is_lower(CodePoint cp);
inline bool is_cased(CodePoint cp) { return is_upper(cp) || is_lower(cp); }

std::u32string fold(std::u32string_view text);

}  // namespace truecase
