#include "truecase/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "truecase/error.hpp"
#include "truecase/inference.hpp"

namespace truecase {

Model initialize_model(ModelConfig config, const std::vector<Sentence>& corpus,
                       std::uint64_t seed) {
  config.char_vocab = build_char_vocab(corpus, config.char_vocab_cap);
  config.char_vocab_size = config.char_vocab.size() + 1;
  Model model(std::move(config));
  model.initialize(seed);
  return model;
}

double sentence_error_rate(const Model& model, const std::vector<Sentence>& references,
                           size_t beam) {
  if (references.empty()) return 0.0;
  TruecaseOptions options;
  options.beam_size = beam;
  size_t errors = 0;
  for (const auto& ref : references) {
    if (truecase_sentence(model, ref, options).output != ref) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(references.size());
}

TrainResult train(const std::vector<Sentence>& corpus, const std::vector<Sentence>& dev,
                  ModelConfig config, const TrainOptions& options,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  return train(initialize_model(std::move(config), corpus, options.seed), corpus, dev, options,
               on_epoch);
}

TrainResult train(Model model, const std::vector<Sentence>& corpus,
                  const std::vector<Sentence>& dev, const TrainOptions& options,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  if (options.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");

  std::vector<PreparedExample> examples;
  examples.reserve(corpus.size());
  for (const auto& s : corpus) examples.push_back(model.prepare(derive_labels(s)));

  TrainResult result{model, {}, false};
  if (options.epochs == 0) return result;

  // Separate streams: shuffling must not shift with the dropout draws.
  nn::Rng shuffle_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  nn::Rng dropout_rng(options.seed + 1);
  const nn::DropoutContext drop{model.config().dropout_rate, true, &dropout_rng};

  nn::ParameterSet grads = model.parameters().zeros_like();
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});

  std::optional<double> best_dev;
  size_t since_best = 0;
  for (size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    for (size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[shuffle_rng.below(k)]);

    double total_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += options.batch_size) {
      const size_t end = std::min(order.size(), start + options.batch_size);
      const float weight = 1.0f / static_cast<float>(end - start);
      grads.set_zero();
      for (size_t b = start; b < end; ++b) {
        const double loss = model.accumulate_gradients(examples[order[b]], grads, weight, drop);
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "non-finite loss at epoch " << epoch << ", corpus line " << order[b] + 1;
          throw NonFiniteLoss(msg.str());
        }
        total_loss += loss;
      }
      nn::sgd_step(model.parameters(), grads, options.learning_rate, options.clip);
      if (!model.parameters().all_finite()) {
        std::ostringstream msg;
        msg << "parameters became non-finite at epoch " << epoch;
        throw NonFiniteLoss(msg.str());
      }
    }

    EpochReport report;
    report.epoch = epoch;
    report.mean_loss = total_loss / static_cast<double>(examples.size());
    bool stop = false;
    if (!dev.empty()) {
      const double ser = sentence_error_rate(model, dev, options.dev_beam);
      report.dev_sentence_error = ser;
      if (!best_dev || ser < *best_dev) {
        best_dev = ser;
        since_best = 0;
        result.model = model;
      } else {
        ++since_best;
      }
      report.best_dev_sentence_error = best_dev;
      stop = *best_dev <= options.target_dev_error || since_best >= options.patience;
    } else {
      result.model = model;
    }
    result.history.push_back(report);
    if (on_epoch) on_epoch(report);
    if (stop) {
      result.early_stopped = epoch < options.epochs;
      break;
    }
  }
  return result;
}

}  // namespace truecase
