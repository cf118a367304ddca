#include "truecase/inference.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "truecase/beam.hpp"
#include "truecase/text.hpp"

namespace truecase {

CharDecode decode_word_case(const Model& model, const std::vector<float>& ctx_vector,
                            const std::u32string& folded_word, size_t beam) {
  auto hyps = beam_search(
      model.char_decoder_start(), folded_word.size(), beam,
      [&](const Hypothesis<nn::StackState>& hyp) {
        const size_t j = hyp.labels.size();
        const int prev = j == 0 ? kStartLabel : hyp.labels.back();
        nn::StackState state = hyp.state;
        const LogProbs lp =
            model.char_step(ctx_vector, model.char_id(folded_word[j]), prev, state);
        std::array<double, 2> scores{lp[0], lp[1]};
        if (!is_lower(folded_word[j])) scores[1] = -std::numeric_limits<double>::infinity();
        return std::make_pair(scores, std::move(state));
      });
  CharDecode out;
  out.log_prob = hyps.front().log_prob;
  for (int label : hyps.front().labels) out.cases.push_back(static_cast<CaseLabel>(label));
  return out;
}

TruecaseResult truecase_sentence(const Model& model, const Sentence& input,
                                 const TruecaseOptions& options) {
  const Sentence folded = case_fold(input);
  const size_t beam = options.beam_size ? options.beam_size : model.config().beam_size;
  const PreparedSentence prepared = model.prepare(folded);
  const ContextEncoding ctx = model.encode_context(prepared);

  auto word_hyps = beam_search(
      model.word_decoder_start(), folded.size(), beam,
      [&](const Hypothesis<nn::StackState>& hyp) {
        const size_t i = hyp.labels.size();
        const int prev = i == 0 ? kStartLabel : hyp.labels.back();
        nn::StackState state = hyp.state;
        const LogProbs lp = model.word_step(ctx.vectors[i], prev, state);
        return std::make_pair(std::array<double, 2>{lp[0], lp[1]}, std::move(state));
      });

  // Character decoding of word i does not depend on the label sequence, so it
  // is shared across word-level hypotheses.
  std::vector<std::optional<CharDecode>> char_cache(folded.size());
  auto char_decode = [&](size_t i) -> const CharDecode& {
    if (!char_cache[i]) {
      char_cache[i] = decode_word_case(model, ctx.vectors[i], prepared.chars[i], beam);
    }
    return *char_cache[i];
  };
  auto total_score = [&](const Hypothesis<nn::StackState>& hyp) {
    double score = hyp.log_prob;
    for (size_t i = 0; i < hyp.labels.size(); ++i) {
      if (hyp.labels[i] == static_cast<int>(WordLabel::kOther)) score += char_decode(i).log_prob;
    }
    return score;
  };

  size_t best = 0;
  double best_score = total_score(word_hyps[0]);
  if (options.use_full_beam) {
    for (size_t h = 1; h < word_hyps.size(); ++h) {
      const double s = total_score(word_hyps[h]);
      if (s > best_score) best = h, best_score = s;
    }
  }

  TruecaseResult result;
  result.log_prob = best_score;
  const auto& labels = word_hyps[best].labels;
  for (size_t i = 0; i < folded.size(); ++i) {
    const auto label = static_cast<WordLabel>(labels[i]);
    result.labels.push_back(label);
    if (label == WordLabel::kSelf) {
      result.output.tokens.push_back(folded.tokens[i]);
    } else {
      result.output.tokens.push_back(apply_case(folded.tokens[i], char_decode(i).cases));
    }
  }
  return result;
}

TruecaseResult truecase_with_prefix(const Model& model, const Sentence& input,
                                    const Sentence& prefix, const TruecaseOptions& options) {
  if (prefix.empty()) return truecase_sentence(model, input, options);
  Sentence joined = prefix;
  joined.tokens.insert(joined.tokens.end(), input.tokens.begin(), input.tokens.end());
  TruecaseResult full = truecase_sentence(model, joined, options);
  TruecaseResult out;
  out.log_prob = full.log_prob;
  out.output.tokens.assign(full.output.tokens.begin() + prefix.size(), full.output.tokens.end());
  out.labels.assign(full.labels.begin() + prefix.size(), full.labels.end());
  return out;
}

size_t default_thread_count() {
  if (const char* env = std::getenv("TRUECASE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void parallel_for_ordered(size_t count, size_t threads, const std::function<void(size_t)>& fn) {
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<Sentence> truecase_corpus(const Model& model, const std::vector<Sentence>& inputs,
                                      const Sentence& prefix, const TruecaseOptions& options,
                                      size_t threads) {
  std::vector<Sentence> out(inputs.size());
  parallel_for_ordered(inputs.size(), threads, [&](size_t i) {
    out[i] = truecase_with_prefix(model, inputs[i], prefix, options).output;
  });
  return out;
}

}  // namespace truecase
