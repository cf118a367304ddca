#pragma once

#include <functional>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/model.hpp"

namespace truecase {

struct TruecaseOptions {
  bool use_full_beam = false;
  // 0 selects the model's configured beam size.
  size_t beam_size = 0;
};

struct TruecaseResult {
  Sentence output;
  std::vector<WordLabel> labels;
  // Word-label log-probability plus the char-case log-probabilities of the
  // OTHER words, for the emitted output.
  double log_prob = 0.0;
};

struct CharDecode {
  std::vector<CaseLabel> cases;
  double log_prob = 0.0;
};

// Best U/L sequence for one word. Caseless characters are forced to L.
CharDecode decode_word_case(const Model& model, const std::vector<float>& ctx_vector,
                            const std::u32string& folded_word, size_t beam);

TruecaseResult truecase_sentence(const Model& model, const Sentence& input,
                                 const TruecaseOptions& options = {});

// Decodes prefix + input as one sentence and strips the prefix tokens.
TruecaseResult truecase_with_prefix(const Model& model, const Sentence& input,
                                    const Sentence& prefix, const TruecaseOptions& options = {});

// Applies fn to indices [0, count) on up to `threads` workers; results keep
// index order. threads == 0 reads TRUECASE_THREADS, falling back to the
// hardware concurrency.
void parallel_for_ordered(size_t count, size_t threads, const std::function<void(size_t)>& fn);
size_t default_thread_count();

std::vector<Sentence> truecase_corpus(const Model& model, const std::vector<Sentence>& inputs,
                                      const Sentence& prefix, const TruecaseOptions& options,
                                      size_t threads = 0);

}  // namespace truecase
