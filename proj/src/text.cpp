#include "truecase/text.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "truecase/error.hpp"

namespace truecase {
namespace {

struct CasePair {
  CodePoint upper;
  CodePoint lower;
};

constexpr CasePair kCasePairs[] = {
#include "case_table.inc"
};

struct CaseIndex {
  std::vector<CasePair> by_upper;
  std::vector<CasePair> by_lower;

  CaseIndex() : by_upper(std::begin(kCasePairs), std::end(kCasePairs)) {
    std::sort(by_upper.begin(), by_upper.end(),
              [](const CasePair& a, const CasePair& b) { return a.upper < b.upper; });
    by_lower = by_upper;
    std::sort(by_lower.begin(), by_lower.end(),
              [](const CasePair& a, const CasePair& b) { return a.lower < b.lower; });
  }
};

const CaseIndex& case_index() {
  static const CaseIndex index;
  return index;
}

const CasePair* find_upper(CodePoint cp) {
  const auto& v = case_index().by_upper;
  auto it = std::lower_bound(v.begin(), v.end(), cp,
                             [](const CasePair& p, CodePoint c) { return p.upper < c; });
  return it != v.end() && it->upper == cp ? &*it : nullptr;
}

const CasePair* find_lower(CodePoint cp) {
  const auto& v = case_index().by_lower;
  auto it = std::lower_bound(v.begin(), v.end(), cp,
                             [](const CasePair& p, CodePoint c) { return p.lower < c; });
  return it != v.end() && it->lower == cp ? &*it : nullptr;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    int extra = 0;
    CodePoint cp = 0;
    CodePoint min = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3, cp = b0 & 0x07, min = 0x10000;
    } else {
      throw DataError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + extra >= text.size() && extra > 0) {
      throw DataError("truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw DataError("invalid UTF-8 continuation byte at offset " +
                        std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw DataError("invalid UTF-8 code point at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

void append_utf8(CodePoint cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (CodePoint cp : text) append_utf8(cp, out);
  return out;
}

CodePoint to_lower(CodePoint cp) {
  if (cp < 0x80) return cp >= 'A' && cp <= 'Z' ? cp + 32 : cp;
  const CasePair* p = find_upper(cp);
  return p ? p->lower : cp;
}

CodePoint to_upper(CodePoint cp) {
  if (cp < 0x80) return cp >= 'a' && cp <= 'z' ? cp - 32 : cp;
  const CasePair* p = find_lower(cp);
  return p ? p->upper : cp;
}

bool is_upper(CodePoint cp) {
  if (cp < 0x80) return cp >= 'A' && cp <= 'Z';
  return find_upper(cp) != nullptr;
}

bool is_lower(CodePoint cp) {
  if (cp < 0x80) return cp >= 'a' && cp <= 'z';
  return find_lower(cp) != nullptr;
}

std::u32string fold(std::u32string_view text) {
  std::u32string out(text);
  for (auto& cp : out) cp = to_lower(cp);
  return out;
}

}  // namespace truecase
