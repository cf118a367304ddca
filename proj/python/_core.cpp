#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "truecase/corpus.hpp"
#include "truecase/distill.hpp"
#include "truecase/error.hpp"
#include "truecase/eval.hpp"
#include "truecase/features.hpp"
#include "truecase/inference.hpp"
#include "truecase/model_io.hpp"
#include "truecase/train.hpp"

namespace py = pybind11;
using namespace truecase;

namespace {

std::vector<Sentence> to_sentences(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(tokenize(l));
  return out;
}

std::vector<std::string> to_lines(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(join(s));
  return out;
}

Sentence prefix_from(const std::string& text) { return text.empty() ? Sentence{} : tokenize(text); }

py::dict json_to_dict(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neural truecaser core";

  static py::exception<DataError> data_error(m, "DataError", PyExc_ValueError);
  static py::exception<ModelFormatError> format_error(m, "ModelFormatError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ModelFormatError& e) {
      format_error(e.what());
    } catch (const DataError& e) {
      data_error(e.what());
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    }
  });

  m.def("case_fold", [](const std::string& line) { return join(case_fold(tokenize(line))); },
        "Lowercase every character that has a one-to-one lowercase mapping.");
  m.def("char_ngrams", [](const std::string& word, int max_n) {
    std::vector<std::string> out;
    for (const auto& g : extract_char_ngrams(std::string_view(word), max_n)) {
      out.push_back(ngram_display(g));
    }
    return out;
  }, py::arg("word"), py::arg("max_n") = 3);
  m.def("hash_feature", [](const std::string& gram, std::uint32_t buckets) {
    return hash_feature(gram, buckets);
  });

  py::class_<Model>(m, "Model")
      .def_static("load", &load_model, py::arg("path"))
      .def_static("from_bytes", [](const py::bytes& b) { return deserialize_model(b); })
      .def("save", [](const Model& model, const std::string& path) { save_model(model, path); })
      .def("to_bytes", [](const Model& model) { return py::bytes(serialize_model(model)); })
      .def_property_readonly("config", [](const Model& model) {
        return json_to_dict(model.config().to_json());
      })
      .def_property_readonly("parameter_count",
                             [](const Model& model) { return model.parameters().parameter_count(); })
      .def("truecase", [](const Model& model, const std::string& line, const std::string& prefix,
                          bool full_beam) {
        TruecaseOptions options;
        options.use_full_beam = full_beam;
        py::gil_scoped_release release;
        return join(truecase_with_prefix(model, tokenize(line), prefix_from(prefix), options).output);
      }, py::arg("line"), py::arg("prefix") = "", py::arg("full_beam") = false)
      .def("truecase_lines", [](const Model& model, const std::vector<std::string>& lines,
                                const std::string& prefix, bool full_beam, size_t threads) {
        TruecaseOptions options;
        options.use_full_beam = full_beam;
        const auto inputs = to_sentences(lines);
        py::gil_scoped_release release;
        return to_lines(truecase_corpus(model, inputs, prefix_from(prefix), options, threads));
      }, py::arg("lines"), py::arg("prefix") = "", py::arg("full_beam") = false,
         py::arg("threads") = 0)
      .def("log_likelihood", [](const Model& model, const std::string& reference) {
        return model.sentence_log_likelihood(derive_labels(tokenize(reference)));
      });

  m.def("train", [](const std::vector<std::string>& corpus, const std::vector<std::string>& dev,
                    const std::string& preset, const std::string& cell, size_t epochs, float lr,
                    size_t batch, std::uint64_t seed, float clip, size_t patience,
                    std::optional<float> dropout, std::function<void(size_t, double)> on_epoch) {
    ModelConfig config = ModelConfig::preset(preset);
    config.cell_kind = cell == "lstm" ? nn::CellKind::kLstm : nn::CellKind::kGru;
    if (dropout) config.dropout_rate = *dropout;
    TrainOptions options;
    options.epochs = epochs;
    options.learning_rate = lr;
    options.batch_size = batch;
    options.seed = seed;
    options.clip = clip;
    options.patience = patience;
    const auto train_set = to_sentences(corpus);
    const auto dev_set = to_sentences(dev);
    std::function<void(const EpochReport&)> callback;
    if (on_epoch) {
      callback = [&](const EpochReport& r) {
        py::gil_scoped_acquire acquire;
        on_epoch(r.epoch, r.mean_loss);
      };
    }
    py::gil_scoped_release release;
    return train(train_set, dev_set, config, options, callback).model;
  }, py::arg("corpus"), py::arg("dev") = std::vector<std::string>{},
     py::arg("preset") = "student", py::arg("cell") = "gru", py::arg("epochs") = 10,
     py::arg("lr") = 0.03f, py::arg("batch") = 32, py::arg("seed") = 1, py::arg("clip") = 5.0f,
     py::arg("patience") = 3, py::arg("dropout") = py::none(), py::arg("on_epoch") = py::none());

  m.def("distill", [](const Model& teacher, const std::vector<std::string>& source,
                      const std::string& prefix) {
    const auto inputs = to_sentences(source);
    py::gil_scoped_release release;
    return to_lines(generate_student_corpus(teacher, inputs, prefix_from(prefix)));
  }, py::arg("teacher"), py::arg("source"), py::arg("prefix") = "so ,");

  m.def("evaluate", [](const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
    return json_to_dict(score(to_sentences(hyp), to_sentences(ref)).to_json());
  }, py::arg("hyp"), py::arg("ref"));
}
