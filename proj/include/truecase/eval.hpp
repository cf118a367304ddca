#pragma once

#include <array>
#include <string>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/error.hpp"

namespace truecase {

struct ClassStats {
  size_t count = 0;
  size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / count : 0.0; }
};

struct MetricsReport {
  size_t nl_predictions = 0;
  size_t nl_references = 0;
  size_t nl_correct = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t sentences = 0;
  size_t tokens = 0;
  double first_word_accuracy = 0.0;
  std::array<ClassStats, 4> per_class{};  // indexed by WordClass

  std::string to_json() const;
  std::string to_table() const;
};

// Thrown when hyp and ref disagree beyond letter case. The message names the
// line (and position).
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

// Fills every field of the report. Zero denominators: no predictions but some
// references gives P = 0; no references but some predictions gives R = 0;
// neither gives P = R = F1 = 1.
MetricsReport score(const std::vector<Sentence>& hyp, const std::vector<Sentence>& ref);

double first_word_accuracy(const std::vector<Sentence>& hyp, const std::vector<Sentence>& ref);
std::array<ClassStats, 4> per_class_report(const std::vector<Sentence>& hyp,
                                           const std::vector<Sentence>& ref);

// Harmonic mean with the zero-denominator conventions above.
double f1_score(double precision, double recall);

}  // namespace truecase
