#include "truecase/corpus.hpp"

#include "truecase/error.hpp"
#include "truecase/text.hpp"

namespace truecase {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

const char* to_string(WordLabel label) {
  return label == WordLabel::kSelf ? "SELF" : "OTHER";
}

const char* to_string(WordClass cls) {
  switch (cls) {
    case WordClass::kLC: return "LC";
    case WordClass::kUC: return "UC";
    case WordClass::kCA: return "CA";
    case WordClass::kMC: return "MC";
  }
  return "?";
}

Sentence tokenize(std::string_view line) {
  Sentence s;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) s.tokens.emplace_back(line.substr(start, i - start));
  }
  if (s.tokens.empty()) throw DataError("empty line");
  return s;
}

std::string join(const Sentence& sentence) {
  std::string out;
  for (size_t i = 0; i < sentence.size(); ++i) {
    if (i) out.push_back(' ');
    out += sentence.tokens[i];
  }
  return out;
}

std::string case_fold_token(std::string_view token) {
  return encode_utf8(fold(decode_utf8(token)));
}

Sentence case_fold(const Sentence& sentence) {
  Sentence out;
  out.tokens.reserve(sentence.size());
  for (const auto& t : sentence.tokens) out.tokens.push_back(case_fold_token(t));
  return out;
}

TrainingExample derive_labels(const Sentence& reference) {
  TrainingExample ex;
  ex.reference = reference;
  ex.word_labels.reserve(reference.size());
  ex.char_labels.resize(reference.size());
  for (size_t i = 0; i < reference.size(); ++i) {
    const std::u32string cased = decode_utf8(reference.tokens[i]);
    const std::u32string folded = fold(cased);
    ex.input.tokens.push_back(encode_utf8(folded));
    if (cased == folded) {
      ex.word_labels.push_back(WordLabel::kSelf);
      continue;
    }
    ex.word_labels.push_back(WordLabel::kOther);
    auto& labels = ex.char_labels[i];
    labels.reserve(cased.size());
    for (size_t j = 0; j < cased.size(); ++j) {
      labels.push_back(cased[j] != folded[j] ? CaseLabel::kUpper : CaseLabel::kLower);
    }
  }
  return ex;
}

std::string apply_case(std::string_view folded_token, const std::vector<CaseLabel>& cases) {
  std::u32string chars = decode_utf8(folded_token);
  if (chars.size() != cases.size()) {
    throw DimensionMismatch("case labels do not match token length");
  }
  for (size_t j = 0; j < chars.size(); ++j) {
    if (cases[j] == CaseLabel::kUpper) chars[j] = to_upper(chars[j]);
  }
  return encode_utf8(chars);
}

Sentence apply_labels(const Sentence& input, const std::vector<WordLabel>& word_labels,
                      const std::vector<std::vector<CaseLabel>>& char_labels) {
  if (word_labels.size() != input.size() || char_labels.size() != input.size()) {
    throw DimensionMismatch("label count does not match sentence length");
  }
  Sentence out;
  out.tokens.reserve(input.size());
  for (size_t i = 0; i < input.size(); ++i) {
    if (word_labels[i] == WordLabel::kSelf) {
      out.tokens.push_back(input.tokens[i]);
    } else {
      out.tokens.push_back(apply_case(input.tokens[i], char_labels[i]));
    }
  }
  return out;
}

WordClass classify_word_class(std::string_view token) {
  const std::u32string chars = decode_utf8(token);
  size_t upper = 0;
  size_t lower = 0;
  bool first_cased_upper = false;
  bool seen_cased = false;
  for (CodePoint cp : chars) {
    const bool u = is_upper(cp);
    const bool l = is_lower(cp);
    if (!u && !l) continue;
    if (!seen_cased) first_cased_upper = u;
    seen_cased = true;
    upper += u;
    lower += l;
  }
  if (upper == 0) return WordClass::kLC;
  if (lower == 0) return WordClass::kCA;
  if (first_cased_upper && upper == 1) return WordClass::kUC;
  return WordClass::kMC;
}

CorpusReader::CorpusReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open corpus " + path);
}

std::optional<Sentence> CorpusReader::next() {
  std::string line;
  if (!std::getline(in_, line)) {
    if (in_.bad()) throw IoError("read failure in " + path_);
    return std::nullopt;
  }
  ++line_number_;
  try {
    Sentence s = tokenize(line);
    for (const auto& t : s.tokens) decode_utf8(t);
    return s;
  } catch (const DataError& e) {
    throw DataError(path_ + ":" + std::to_string(line_number_) + ": malformed line (" +
                    e.what() + ")");
  }
}

CorpusWriter::CorpusWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
}

void CorpusWriter::write(const Sentence& sentence) {
  out_ << join(sentence) << '\n';
  if (!out_) throw IoError("write failure in " + path_);
}

void CorpusWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("cannot close " + path_);
}

std::vector<Sentence> read_corpus(const std::string& path) {
  CorpusReader reader(path);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

void write_corpus(const std::vector<Sentence>& sentences, const std::string& path) {
  CorpusWriter writer(path);
  for (const auto& s : sentences) writer.write(s);
  writer.close();
}

}  // namespace truecase
