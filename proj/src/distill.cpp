#include "truecase/distill.hpp"

#include "truecase/error.hpp"

namespace truecase {

Sentence default_prefix() { return Sentence{{"so", ","}}; }

std::vector<Sentence> generate_student_corpus(const Model& teacher,
                                              const std::vector<Sentence>& source,
                                              const Sentence& prefix,
                                              const TruecaseOptions& decode, size_t threads) {
  if (prefix.empty()) throw std::invalid_argument("distillation prefix must be non-empty");
  std::vector<Sentence> folded;
  folded.reserve(source.size());
  for (const auto& s : source) folded.push_back(case_fold(s));
  return truecase_corpus(teacher, folded, prefix, decode, threads);
}

size_t generate_student_corpus(const DistillJob& job) {
  if (!job.teacher) throw std::invalid_argument("distillation job has no teacher");
  const auto source = read_corpus(job.source_path);
  const auto regenerated =
      generate_student_corpus(*job.teacher, source, job.prefix, job.decode, job.threads);
  write_corpus(regenerated, job.output_path);
  return regenerated.size();
}

DistillResult distill_train(const Model& teacher, const std::vector<Sentence>& source,
                            const Sentence& prefix, const ModelConfig& student_config,
                            const TrainOptions& options, const std::vector<Sentence>& dev,
                            const std::function<void(const EpochReport&)>& on_epoch) {
  std::vector<Sentence> regenerated = generate_student_corpus(teacher, source, prefix);
  TrainResult student = train(regenerated, dev, student_config, options, on_epoch);
  return DistillResult{std::move(regenerated), std::move(student)};
}

}  // namespace truecase
