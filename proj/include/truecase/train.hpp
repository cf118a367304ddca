#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/model.hpp"

namespace truecase {

struct TrainOptions {
  size_t epochs = 10;
  float learning_rate = 0.03f;
  size_t batch_size = 32;
  std::uint64_t seed = 1;
  // Global gradient-norm clip; 0 disables clipping.
  float clip = 5.0f;
  // Epochs without dev improvement before stopping.
  size_t patience = 3;
  // Beam used when decoding the dev set; 0 uses the model's beam.
  size_t dev_beam = 0;
  // Stop once the best dev sentence error rate is at or below this value.
  double target_dev_error = 0.0;
};

struct EpochReport {
  size_t epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> dev_sentence_error;
  std::optional<double> best_dev_sentence_error;
};

struct TrainResult {
  Model model;
  std::vector<EpochReport> history;
  bool early_stopped = false;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Builds the character vocabulary from the corpus and initializes weights.
Model initialize_model(ModelConfig config, const std::vector<Sentence>& corpus,
                       std::uint64_t seed);

// Fraction of reference sentences not reproduced exactly from their
// case-folded form.
double sentence_error_rate(const Model& model, const std::vector<Sentence>& references,
                           size_t beam = 0);

// Minimizes the mean negative log-likelihood by minibatch SGD. With a dev set,
// keeps the parameters of the best dev epoch and stops after `patience`
// epochs without improvement (or as soon as the dev error reaches the target).
TrainResult train(const std::vector<Sentence>& corpus, const std::vector<Sentence>& dev,
                  ModelConfig config, const TrainOptions& options,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

// Continues training an existing model (same contract as above).
TrainResult train(Model model, const std::vector<Sentence>& corpus,
                  const std::vector<Sentence>& dev, const TrainOptions& options,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

}  // namespace truecase
