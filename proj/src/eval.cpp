#include "truecase/eval.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace truecase {
namespace {

void check_aligned(const std::vector<Sentence>& hyp, const std::vector<Sentence>& ref) {
  if (hyp.size() != ref.size()) {
    throw AlignmentError("line count mismatch: hyp has " + std::to_string(hyp.size()) +
                         " lines, ref has " + std::to_string(ref.size()));
  }
  for (size_t line = 0; line < hyp.size(); ++line) {
    if (hyp[line].size() != ref[line].size()) {
      throw AlignmentError("line " + std::to_string(line + 1) + ": token count mismatch (" +
                           std::to_string(hyp[line].size()) + " vs " +
                           std::to_string(ref[line].size()) + ")");
    }
    for (size_t i = 0; i < hyp[line].size(); ++i) {
      if (case_fold_token(hyp[line][i]) != case_fold_token(ref[line][i])) {
        throw AlignmentError("line " + std::to_string(line + 1) + ", token " +
                             std::to_string(i + 1) + ": '" + hyp[line][i] + "' vs '" +
                             ref[line][i] + "' differ beyond case");
      }
    }
  }
}

bool is_non_lowercase(const std::string& token) { return case_fold_token(token) != token; }

}  // namespace

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double first_word_accuracy(const std::vector<Sentence>& hyp, const std::vector<Sentence>& ref) {
  check_aligned(hyp, ref);
  if (hyp.empty()) return 1.0;
  size_t correct = 0;
  for (size_t line = 0; line < hyp.size(); ++line) correct += hyp[line][0] == ref[line][0];
  return static_cast<double>(correct) / static_cast<double>(hyp.size());
}

std::array<ClassStats, 4> per_class_report(const std::vector<Sentence>& hyp,
                                           const std::vector<Sentence>& ref) {
  check_aligned(hyp, ref);
  std::array<ClassStats, 4> stats{};
  for (size_t line = 0; line < hyp.size(); ++line) {
    for (size_t i = 0; i < hyp[line].size(); ++i) {
      auto& s = stats[static_cast<size_t>(classify_word_class(ref[line][i]))];
      ++s.count;
      s.correct += hyp[line][i] == ref[line][i];
    }
  }
  return stats;
}

MetricsReport score(const std::vector<Sentence>& hyp, const std::vector<Sentence>& ref) {
  check_aligned(hyp, ref);
  MetricsReport r;
  r.sentences = hyp.size();
  for (size_t line = 0; line < hyp.size(); ++line) {
    for (size_t i = 0; i < hyp[line].size(); ++i) {
      const bool predicted = is_non_lowercase(hyp[line][i]);
      const bool referenced = is_non_lowercase(ref[line][i]);
      r.nl_predictions += predicted;
      r.nl_references += referenced;
      r.nl_correct += predicted && hyp[line][i] == ref[line][i];
      ++r.tokens;
    }
  }
  if (r.nl_predictions == 0 && r.nl_references == 0) {
    r.precision = r.recall = r.f1 = 1.0;
  } else {
    r.precision = r.nl_predictions ? static_cast<double>(r.nl_correct) / r.nl_predictions : 0.0;
    r.recall = r.nl_references ? static_cast<double>(r.nl_correct) / r.nl_references : 0.0;
    r.f1 = f1_score(r.precision, r.recall);
  }
  r.first_word_accuracy = first_word_accuracy(hyp, ref);
  r.per_class = per_class_report(hyp, ref);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["nl_predictions"] = nl_predictions;
  j["nl_references"] = nl_references;
  j["nl_correct"] = nl_correct;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  j["sentences"] = sentences;
  j["tokens"] = tokens;
  j["first_word_accuracy"] = first_word_accuracy;
  nlohmann::ordered_json classes;
  for (size_t c = 0; c < per_class.size(); ++c) {
    classes[to_string(static_cast<WordClass>(c))] = {{"count", per_class[c].count},
                                                      {"correct", per_class[c].correct},
                                                      {"accuracy", per_class[c].accuracy()}};
  }
  j["per_class"] = classes;
  j["zero_denominator_convention"] =
      "no NL predictions => precision 0; no NL references => recall 0; neither => all 1";
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "NL predictions " << nl_predictions << "  references " << nl_references << "  correct "
      << nl_correct << "\n";
  out << "precision " << 100 * precision << "  recall " << 100 * recall << "  F1 " << 100 * f1
      << "\n";
  out << "first-word accuracy " << 100 * first_word_accuracy << " (" << sentences
      << " sentences)\n";
  out << "class  count  accuracy\n";
  for (size_t c = 0; c < per_class.size(); ++c) {
    out << std::left << std::setw(7) << to_string(static_cast<WordClass>(c)) << std::right
        << std::setw(5) << per_class[c].count << "  " << 100 * per_class[c].accuracy() << "\n";
  }
  return out.str();
}

}  // namespace truecase
