#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/model.hpp"
#include "truecase/text.hpp"

namespace truecase::testing {

struct OracleDecode {
  Sentence output;
  double log_prob = -std::numeric_limits<double>::infinity();
};

// Scores every case sequence of one folded word with the model's
// teacher-forced char distributions. Caseless characters may only be L.
inline std::pair<std::vector<CaseLabel>, double> best_char_cases(const Model& model,
                                                                 const std::vector<float>& ctx,
                                                                 const std::u32string& word) {
  std::vector<CaseLabel> best;
  double best_lp = -std::numeric_limits<double>::infinity();
  for (size_t mask = 0; mask < (size_t{1} << word.size()); ++mask) {
    std::vector<CaseLabel> cases(word.size());
    bool allowed = true;
    for (size_t j = 0; j < word.size(); ++j) {
      cases[j] = (mask >> j) & 1 ? CaseLabel::kUpper : CaseLabel::kLower;
      if (cases[j] == CaseLabel::kUpper && !is_lower(word[j])) allowed = false;
    }
    if (!allowed) continue;
    double lp = 0.0;
    const auto steps = model.char_case_log_probs(ctx, word, cases);
    for (size_t j = 0; j < word.size(); ++j) lp += steps[j][static_cast<int>(cases[j])];
    if (lp > best_lp) best_lp = lp, best = cases;
  }
  return {best, best_lp};
}

// Exhaustive argmax over all word-label sequences. With joint = true the
// objective is word term + best char term of every OTHER word; otherwise the
// labels maximize the word term alone and chars are chosen afterwards.
inline OracleDecode exhaustive_decode(const Model& model, const Sentence& input, bool joint) {
  const Sentence folded = case_fold(input);
  const size_t n = folded.size();
  const auto ctx = model.encode_context(folded);
  std::vector<std::pair<std::vector<CaseLabel>, double>> chars;
  for (size_t i = 0; i < n; ++i) {
    chars.push_back(best_char_cases(model, ctx.vectors[i], decode_utf8(folded[i])));
  }
  OracleDecode best;
  std::vector<WordLabel> best_labels;
  double best_objective = -std::numeric_limits<double>::infinity();
  for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
    std::vector<WordLabel> labels(n);
    for (size_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1 ? WordLabel::kOther : WordLabel::kSelf;
    const auto steps = model.word_label_log_probs(ctx, labels);
    double word = 0.0, total = 0.0;
    for (size_t i = 0; i < n; ++i) word += steps[i][static_cast<int>(labels[i])];
    total = word;
    for (size_t i = 0; i < n; ++i) {
      if (labels[i] == WordLabel::kOther) total += chars[i].second;
    }
    const double objective = joint ? total : word;
    if (objective > best_objective) {
      best_objective = objective;
      best.log_prob = total;
      best_labels = labels;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    best.output.tokens.push_back(best_labels[i] == WordLabel::kSelf
                                     ? folded[i]
                                     : apply_case(folded[i], chars[i].first));
  }
  return best;
}

}  // namespace truecase::testing
