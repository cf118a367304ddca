#pragma once

#include <string>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/inference.hpp"
#include "truecase/model.hpp"
#include "truecase/train.hpp"

namespace truecase {

// Default distillation prefix: "so ,".
Sentence default_prefix();

struct DistillJob {
  const Model* teacher = nullptr;
  Sentence prefix = default_prefix();
  std::string source_path;
  std::string output_path;
  TruecaseOptions decode;
  size_t threads = 0;
};

// Folds each source sentence, decodes it with the teacher behind the prefix,
// strips the prefix and returns the teacher's output. Order and token counts
// are preserved.
std::vector<Sentence> generate_student_corpus(const Model& teacher,
                                              const std::vector<Sentence>& source,
                                              const Sentence& prefix,
                                              const TruecaseOptions& decode = {},
                                              size_t threads = 0);

// File-to-file variant; returns the number of lines written.
size_t generate_student_corpus(const DistillJob& job);

struct DistillResult {
  std::vector<Sentence> regenerated;
  TrainResult student;
};

// Regenerates the corpus once with the teacher, then trains the student on it.
DistillResult distill_train(const Model& teacher, const std::vector<Sentence>& source,
                            const Sentence& prefix, const ModelConfig& student_config,
                            const TrainOptions& options,
                            const std::vector<Sentence>& dev = {},
                            const std::function<void(const EpochReport&)>& on_epoch = {});

}  // namespace truecase
