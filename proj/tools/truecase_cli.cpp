#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "truecase/corpus.hpp"
#include "truecase/distill.hpp"
#include "truecase/error.hpp"
#include "truecase/eval.hpp"
#include "truecase/inference.hpp"
#include "truecase/model_io.hpp"
#include "truecase/train.hpp"

namespace {

using namespace truecase;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

void log_line(const std::string& message) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::cerr << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << message << std::endl;
}

void log_epoch(const EpochReport& r) {
  std::ostringstream msg;
  msg << "epoch " << r.epoch << " loss " << std::fixed << std::setprecision(4) << r.mean_loss;
  if (r.dev_sentence_error) {
    msg << " dev_ser " << *r.dev_sentence_error << " best_dev_ser " << *r.best_dev_sentence_error;
  }
  log_line(msg.str());
}

// Options shared by train and distill --train-student. Unset values fall back
// to the preset.
struct TrainFlags {
  std::string preset;
  std::optional<std::string> cell;
  std::optional<size_t> epochs;
  std::optional<float> lr;
  std::optional<float> dropout;
  std::optional<size_t> batch;
  std::optional<std::uint64_t> seed;
  std::optional<float> clip;
  std::optional<size_t> patience;

  void add_to(CLI::App& app, const std::string& default_preset) {
    preset = default_preset;
    app.add_option("--preset", preset, "Hyper-parameter preset")
        ->check(CLI::IsMember({"teacher", "student"}))
        ->capture_default_str();
    app.add_option("--cell", cell, "Recurrent cell")->check(CLI::IsMember({"gru", "lstm"}));
    app.add_option("--epochs", epochs, "Maximum epochs (default 10)");
    app.add_option("--lr", lr, "SGD learning rate (default 0.03)")->check(CLI::NonNegativeNumber);
    app.add_option("--dropout", dropout, "Input dropout rate (default from preset)")
        ->check(CLI::Range(0.0, 0.999));
    app.add_option("--batch", batch, "Minibatch size (default 32)")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Random seed (default 1)");
    app.add_option("--clip", clip, "Gradient norm clip, 0 disables (default 5)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--patience", patience, "Epochs without dev improvement (default 3)");
  }

  ModelConfig model_config() const {
    ModelConfig c = ModelConfig::preset(preset);
    if (cell) c.cell_kind = *cell == "lstm" ? nn::CellKind::kLstm : nn::CellKind::kGru;
    if (dropout) c.dropout_rate = *dropout;
    return c;
  }

  TrainOptions options() const {
    TrainOptions o;
    if (epochs) o.epochs = *epochs;
    if (lr) o.learning_rate = *lr;
    if (batch) o.batch_size = *batch;
    if (seed) o.seed = *seed;
    if (clip) o.clip = *clip;
    if (patience) o.patience = *patience;
    return o;
  }
};

int run_train(const std::string& corpus_path, const std::string& dev_path,
              const std::string& out_path, const TrainFlags& flags) {
  const auto corpus = read_corpus(corpus_path);
  const auto dev = dev_path.empty() ? std::vector<Sentence>{} : read_corpus(dev_path);
  const ModelConfig config = flags.model_config();
  const TrainOptions options = flags.options();
  log_line("training " + flags.preset + " model on " + std::to_string(corpus.size()) +
           " sentences" + (dev.empty() ? "" : ", dev " + std::to_string(dev.size())));
  const auto result = train(corpus, dev, config, options, log_epoch);
  if (result.early_stopped) log_line("stopped early");
  save_model(result.model, out_path);
  log_line("wrote " + out_path);
  return kExitOk;
}

int run_distill(const std::string& teacher_path, const std::string& corpus_path,
                const std::string& prefix_text, const std::string& out_path, bool full_beam,
                bool train_student, const std::string& student_out, const std::string& dev_path,
                const TrainFlags& flags) {
  const Model teacher = load_model(teacher_path);
  DistillJob job;
  job.teacher = &teacher;
  job.prefix = tokenize(prefix_text);
  job.source_path = corpus_path;
  job.output_path = out_path;
  job.decode.use_full_beam = full_beam;
  const size_t lines = generate_student_corpus(job);
  log_line("regenerated " + std::to_string(lines) + " lines into " + out_path);
  if (!train_student) return kExitOk;

  const auto corpus = read_corpus(out_path);
  const auto dev = dev_path.empty() ? std::vector<Sentence>{} : read_corpus(dev_path);
  const auto result = train(corpus, dev, flags.model_config(), flags.options(), log_epoch);
  save_model(result.model, student_out);
  log_line("wrote student " + student_out);
  return kExitOk;
}

int run_truecase(const std::string& model_path, const std::string& prefix_text, bool full_beam) {
  const Model model = load_model(model_path);
  const Sentence prefix = prefix_text.empty() ? Sentence{} : tokenize(prefix_text);
  TruecaseOptions options;
  options.use_full_beam = full_beam;

  constexpr size_t kChunk = 256;
  std::vector<std::string> raw;
  std::string line;
  size_t line_no = 0;
  auto flush = [&] {
    std::vector<Sentence> inputs;
    std::vector<size_t> slots;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].find_first_not_of(' ') == std::string::npos) continue;
      try {
        inputs.push_back(tokenize(raw[i]));
      } catch (const DataError& e) {
        throw DataError("stdin:" + std::to_string(line_no - raw.size() + i + 1) + ": " +
                        e.what());
      }
      slots.push_back(i);
    }
    const auto outputs = truecase_corpus(model, inputs, prefix, options);
    std::vector<std::string> text(raw.size());
    for (size_t k = 0; k < slots.size(); ++k) text[slots[k]] = join(outputs[k]);
    for (const auto& t : text) std::cout << t << '\n';
    std::cout.flush();
    raw.clear();
  };
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    raw.push_back(line);
    ++line_no;
    if (raw.size() == kChunk) flush();
  }
  flush();
  return kExitOk;
}

int run_evaluate(const std::string& hyp_path, const std::string& ref_path, bool first_word,
                 bool per_class) {
  const auto report = score(read_corpus(hyp_path), read_corpus(ref_path));
  auto j = nlohmann::ordered_json::parse(report.to_json());
  if (!first_word) j.erase("first_word_accuracy");
  if (!per_class) j.erase("per_class");
  std::cout << j.dump(2) << std::endl;

  std::string table = report.to_table();
  std::istringstream lines(table);
  std::string out, l;
  bool in_classes = false;
  while (std::getline(lines, l)) {
    if (l.rfind("first-word", 0) == 0 && !first_word) continue;
    if (l.rfind("class", 0) == 0) in_classes = true;
    if (in_classes && !per_class) continue;
    out += l + '\n';
  }
  std::cerr << out;
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kModelFormat: return kExitModel;
    case ErrorKind::kData:
    case ErrorKind::kIo: return kExitData;
    case ErrorKind::kNumeric: return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural truecaser: train, distill, truecase and evaluate"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");

  std::string corpus, dev, out, teacher_path, prefix, student_out, model_path, hyp, ref;
  bool full_beam = false, train_student = false, first_word = false, per_class = false;

  auto* train_cmd = app.add_subcommand("train", "Train a model on a cased corpus");
  train_cmd->add_option("--corpus", corpus, "Training corpus")->required();
  train_cmd->add_option("--dev", dev, "Dev corpus for early stopping");
  train_cmd->add_option("--out", out, "Output model file")->required();
  TrainFlags train_flags;
  train_flags.add_to(*train_cmd, "teacher");

  auto* distill_cmd = app.add_subcommand("distill", "Regenerate a corpus with a teacher model");
  distill_cmd->add_option("--teacher", teacher_path, "Teacher model file")->required();
  distill_cmd->add_option("--corpus", corpus, "Source corpus")->required();
  prefix = "so ,";
  distill_cmd->add_option("--prefix", prefix, "Space-separated prefix tokens")
      ->capture_default_str();
  distill_cmd->add_option("--out", out, "Regenerated corpus")->required();
  distill_cmd->add_flag("--full-beam", full_beam, "Rescore the whole word beam");
  auto* student_flag =
      distill_cmd->add_flag("--train-student", train_student, "Train a student afterwards");
  distill_cmd->add_option("--student-out", student_out, "Student model file")
      ->needs(student_flag);
  distill_cmd->add_option("--dev", dev, "Dev corpus for the student");
  TrainFlags student_flags;
  student_flags.add_to(*distill_cmd, "student");

  auto* truecase_cmd = app.add_subcommand("truecase", "Truecase standard input");
  truecase_cmd->add_option("--model", model_path, "Model file")->required();
  std::string inference_prefix;
  truecase_cmd->add_option("--prefix", inference_prefix, "Prefix decoded and then removed");
  truecase_cmd->add_flag("--full-beam", full_beam, "Rescore the whole word beam");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a hypothesis against a reference");
  evaluate_cmd->add_option("--hyp", hyp, "Hypothesis corpus")->required();
  evaluate_cmd->add_option("--ref", ref, "Reference corpus")->required();
  evaluate_cmd->add_flag("--first-word", first_word, "Report first-word accuracy");
  evaluate_cmd->add_flag("--per-class", per_class, "Report per-class accuracy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return run_train(corpus, dev, out, train_flags);
    if (*distill_cmd) {
      if (train_student && student_out.empty()) {
        std::cerr << "error: --train-student requires --student-out\n";
        return kExitUsage;
      }
      return run_distill(teacher_path, corpus, prefix, out, full_beam, train_student, student_out,
                         dev, student_flags);
    }
    if (*truecase_cmd) return run_truecase(model_path, inference_prefix, full_beam);
    if (*evaluate_cmd) return run_evaluate(hyp, ref, first_word, per_class);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
