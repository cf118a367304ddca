#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace truecase {

// The word-boundary symbol is an out-of-alphabet sentinel. When an n-gram is
// rendered to bytes for hashing it is encoded as 0xFF, a byte that never
// occurs in valid UTF-8.
inline constexpr char32_t kBoundary = 0xFFFFFFFF;

// All n-grams (1 <= n <= max_n) of <s>word<s>, excluding n-grams made only of
// boundary symbols. Duplicates are kept; order is by n, then by position.
std::vector<std::u32string> extract_char_ngrams(std::u32string_view word, int max_n);
std::vector<std::u32string> extract_char_ngrams(std::string_view word, int max_n);

// Byte rendering used for hashing; also handy for printing ("<s>" markers).
std::string ngram_bytes(std::u32string_view ngram);
std::string ngram_display(std::u32string_view ngram);

// 64-bit FNV-1a over the UTF-8 bytes, modulo buckets.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint32_t hash_feature(std::string_view ngram_bytes, std::uint32_t buckets);

std::vector<std::uint32_t> feature_ids(std::string_view word, int max_n, std::uint32_t buckets);

// Sums rows of a row-major [buckets x width] table over the feature multiset.
std::vector<float> embed_word(std::span<const std::uint32_t> ids, std::span<const float> table,
                              std::uint32_t buckets, std::size_t width);

}  // namespace truecase
