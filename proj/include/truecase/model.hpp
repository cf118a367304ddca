#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/nn.hpp"

namespace truecase {

struct ModelConfig {
  size_t input_embedding_size = 128;
  size_t output_embedding_size = 128;
  size_t fwd_encoder_layers = 1;
  size_t bwd_encoder_layers = 1;
  size_t decoder_layers = 1;
  size_t encoder_cells_per_layer = 128;
  size_t decoder_cells_per_layer = 128;
  int max_ngram_order = 3;
  std::uint32_t ngram_buckets = 5000;
  size_t beam_size = 2;
  nn::CellKind cell_kind = nn::CellKind::kGru;
  float dropout_rate = 0.25f;
  // Rows of the character embedding table: the vocabulary plus UNK (row 0).
  size_t char_vocab_size = 1;
  size_t char_vocab_cap = 512;
  // Case-folded characters, in row order starting at row 1.
  std::u32string char_vocab;

  static ModelConfig teacher();
  static ModelConfig student();
  static ModelConfig preset(const std::string& name);

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

// Most frequent case-folded characters first (ties by code point), capped so
// that vocabulary plus UNK fits in char_vocab_cap rows.
std::u32string build_char_vocab(const std::vector<Sentence>& corpus, size_t cap);

// Label ids fed back into the decoders. Row 2 of each label table is the
// start symbol.
inline constexpr int kStartLabel = 2;

struct ContextEncoding {
  std::vector<std::vector<float>> vectors;  // one per token, width 2 x encoder cells

  size_t size() const { return vectors.size(); }
};

using LogProbs = std::array<float, 2>;

// Inputs pre-computed for one sentence: hashed n-gram ids and character rows.
struct PreparedSentence {
  std::vector<std::vector<std::uint32_t>> feature_ids;
  std::vector<std::u32string> chars;
  std::vector<std::vector<int>> char_ids;
};

struct PreparedExample {
  PreparedSentence input;
  std::vector<WordLabel> word_labels;
  std::vector<std::vector<CaseLabel>> char_labels;
};

class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }

  // Uniform [-0.08, 0.08] weights, zero biases, LSTM forget bias 1.
  void initialize(std::uint64_t seed);

  int char_id(char32_t c) const;
  PreparedSentence prepare(const Sentence& input) const;
  PreparedExample prepare(const TrainingExample& example) const;

  std::vector<float> embed_word(const std::vector<std::uint32_t>& ids) const;
  ContextEncoding encode_context(const Sentence& input) const;
  ContextEncoding encode_context(const PreparedSentence& input) const;

  // Teacher-forced per-step distributions over {SELF, OTHER}.
  std::vector<LogProbs> word_label_log_probs(const ContextEncoding& ctx,
                                             const std::vector<WordLabel>& labels) const;
  // Teacher-forced per-character distributions over {L, U}.
  std::vector<LogProbs> char_case_log_probs(const std::vector<float>& ctx_vector,
                                            const std::u32string& folded_word,
                                            const std::vector<CaseLabel>& cases) const;

  // Log-likelihood of the gold labels: word-label term plus the char-case
  // terms of OTHER words. No dropout.
  double sentence_log_likelihood(const TrainingExample& example) const;
  double sentence_log_likelihood(const PreparedExample& example) const;

  // Adds weight * d(-log-likelihood)/d(theta) into grads and returns the
  // (unweighted) negative log-likelihood. Dropout is active when drop.training.
  double accumulate_gradients(const PreparedExample& example, nn::ParameterSet& grads,
                              float weight, const nn::DropoutContext& drop) const;

  // Incremental decoding.
  nn::StackState word_decoder_start() const { return word_decoder_.initial_state(); }
  nn::StackState char_decoder_start() const { return char_decoder_.initial_state(); }
  LogProbs word_step(const std::vector<float>& ctx_vector, int prev_label,
                     nn::StackState& state) const;
  LogProbs char_step(const std::vector<float>& ctx_vector, int char_row, int prev_case,
                     nn::StackState& state) const;

 private:
  struct SentenceTrace;

  std::vector<float> word_input(const std::vector<float>& ctx_vector, int prev_label) const;
  std::vector<float> char_input(const std::vector<float>& ctx_vector, int char_row,
                                int prev_case) const;
  void run_encoder(const PreparedSentence& input, const nn::DropoutContext& drop,
                   SentenceTrace* trace, ContextEncoding& ctx) const;
  double forward_backward(const PreparedExample& example, nn::ParameterSet* grads, float weight,
                          const nn::DropoutContext& drop) const;

  ModelConfig config_;
  nn::ParameterSet params_;
  size_t ngram_table_ = 0;
  size_t label_embedding_ = 0;
  size_t char_embedding_ = 0;
  size_t case_embedding_ = 0;
  nn::RnnStack fwd_encoder_;
  nn::RnnStack bwd_encoder_;
  nn::RnnStack word_decoder_;
  nn::Dense word_output_;
  nn::RnnStack char_decoder_;
  nn::Dense char_output_;
  std::unordered_map<char32_t, int> char_rows_;
};

}  // namespace truecase
