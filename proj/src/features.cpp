#include "truecase/features.hpp"

#include <algorithm>

#include "truecase/error.hpp"
#include "truecase/text.hpp"

namespace truecase {

std::vector<std::u32string> extract_char_ngrams(std::u32string_view word, int max_n) {
  std::u32string padded;
  padded.reserve(word.size() + 2);
  padded.push_back(kBoundary);
  padded.append(word);
  padded.push_back(kBoundary);

  std::vector<std::u32string> out;
  for (int n = 1; n <= max_n; ++n) {
    if (static_cast<size_t>(n) > padded.size()) break;
    for (size_t start = 0; start + n <= padded.size(); ++start) {
      std::u32string_view gram(padded.data() + start, n);
      const bool all_boundary =
          std::all_of(gram.begin(), gram.end(), [](char32_t c) { return c == kBoundary; });
      if (!all_boundary) out.emplace_back(gram);
    }
  }
  return out;
}

std::vector<std::u32string> extract_char_ngrams(std::string_view word, int max_n) {
  return extract_char_ngrams(decode_utf8(word), max_n);
}

std::string ngram_bytes(std::u32string_view ngram) {
  std::string out;
  for (char32_t c : ngram) {
    if (c == kBoundary) {
      out.push_back(static_cast<char>(0xFF));
    } else {
      append_utf8(c, out);
    }
  }
  return out;
}

std::string ngram_display(std::u32string_view ngram) {
  std::string out;
  for (char32_t c : ngram) {
    if (c == kBoundary) {
      out += "<s>";
    } else {
      append_utf8(c, out);
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t hash_feature(std::string_view ngram_bytes, std::uint32_t buckets) {
  if (buckets == 0) throw std::invalid_argument("buckets must be >= 1");
  return static_cast<std::uint32_t>(fnv1a64(ngram_bytes) % buckets);
}

std::vector<std::uint32_t> feature_ids(std::string_view word, int max_n, std::uint32_t buckets) {
  std::vector<std::uint32_t> ids;
  for (const auto& gram : extract_char_ngrams(word, max_n)) {
    ids.push_back(hash_feature(ngram_bytes(gram), buckets));
  }
  return ids;
}

std::vector<float> embed_word(std::span<const std::uint32_t> ids, std::span<const float> table,
                              std::uint32_t buckets, std::size_t width) {
  if (table.size() != static_cast<size_t>(buckets) * width) {
    throw DimensionMismatch("embedding table is not buckets x width");
  }
  std::vector<float> out(width, 0.0f);
  for (std::uint32_t id : ids) {
    if (id >= buckets) throw DimensionMismatch("feature id out of range");
    const float* row = table.data() + static_cast<size_t>(id) * width;
    for (size_t k = 0; k < width; ++k) out[k] += row[k];
  }
  return out;
}

}  // namespace truecase
