#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace truecase {

// A tokenized sentence. Tokens are non-empty and whitespace-free.
struct Sentence {
  std::vector<std::string> tokens;

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const std::string& operator[](size_t i) const { return tokens[i]; }
  bool operator==(const Sentence&) const = default;
};

enum class WordLabel : int { kSelf = 0, kOther = 1 };
enum class CaseLabel : int { kLower = 0, kUpper = 1 };
enum class WordClass : int { kLC = 0, kUC = 1, kCA = 2, kMC = 3 };

const char* to_string(WordLabel label);
const char* to_string(WordClass cls);

struct TrainingExample {
  Sentence input;       // case-folded
  Sentence reference;   // cased
  std::vector<WordLabel> word_labels;
  // Indexed by token; empty for SELF tokens, one entry per character otherwise.
  std::vector<std::vector<CaseLabel>> char_labels;
};

// Splits on whitespace. Throws DataError when no tokens remain.
Sentence tokenize(std::string_view line);
std::string join(const Sentence& sentence);

std::string case_fold_token(std::string_view token);
Sentence case_fold(const Sentence& sentence);

TrainingExample derive_labels(const Sentence& reference);

// Inverse of derive_labels: copies SELF tokens, applies U/L to OTHER tokens.
Sentence apply_labels(const Sentence& input, const std::vector<WordLabel>& word_labels,
                      const std::vector<std::vector<CaseLabel>>& char_labels);

// Uppercases characters labelled U through the bijective map; others copied.
std::string apply_case(std::string_view folded_token, const std::vector<CaseLabel>& cases);

WordClass classify_word_class(std::string_view token);

// Streaming reader for the one-sentence-per-line corpus format.
class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path);

  // Returns the next sentence, or nullopt at end of file. Throws DataError
  // carrying the line number on an empty line.
  std::optional<Sentence> next();
  size_t line_number() const { return line_number_; }

 private:
  std::string path_;
  std::ifstream in_;
  size_t line_number_ = 0;
};

class CorpusWriter {
 public:
  explicit CorpusWriter(const std::string& path);
  void write(const Sentence& sentence);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

std::vector<Sentence> read_corpus(const std::string& path);
void write_corpus(const std::vector<Sentence>& sentences, const std::string& path);

}  // namespace truecase
