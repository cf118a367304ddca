#pragma once

// Test-only double-precision re-implementation of the hierarchical model's
// likelihood. It reads the trained tensors by name and recomputes every
// recurrence from scratch, so it shares no arithmetic with the float code path.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "truecase/corpus.hpp"
#include "truecase/features.hpp"
#include "truecase/model.hpp"
#include "truecase/text.hpp"

namespace truecase::testing {

class ReferenceModel {
 public:
  using Vec = std::vector<double>;

  explicit ReferenceModel(const Model& model) : config_(model.config()) {
    const auto& p = model.parameters();
    for (size_t t = 0; t < p.size(); ++t) {
      Tensor64 tensor;
      tensor.dims = p[t].dims;
      tensor.data.assign(p[t].data.begin(), p[t].data.end());
      tensors_[p.name(t)] = std::move(tensor);
    }
    for (size_t k = 0; k < config_.char_vocab.size(); ++k) {
      char_rows_[config_.char_vocab[k]] = static_cast<int>(k + 1);
    }
  }

  std::vector<double>& tensor(const std::string& name) { return tensors_.at(name).data; }

  // log P(C|X) + sum over gold-OTHER words of log P(y_i|X), in double.
  double log_likelihood(const TrainingExample& ex) const {
    const size_t n = ex.input.size();
    const size_t hid = config_.encoder_cells_per_layer;
    std::vector<Vec> emb(n);
    for (size_t i = 0; i < n; ++i) {
      emb[i].assign(config_.input_embedding_size, 0.0);
      const auto& table = tensors_.at("ngram_embedding");
      for (auto id : feature_ids(ex.input[i], config_.max_ngram_order, config_.ngram_buckets)) {
        for (size_t k = 0; k < emb[i].size(); ++k) {
          emb[i][k] += table.data[id * config_.input_embedding_size + k];
        }
      }
    }
    std::vector<Vec> fwd = run_stack("encoder.fwd", config_.fwd_encoder_layers, emb);
    std::vector<Vec> rev(emb.rbegin(), emb.rend());
    std::vector<Vec> bwd = run_stack("encoder.bwd", config_.bwd_encoder_layers, rev);
    std::vector<Vec> ctx(n);
    for (size_t i = 0; i < n; ++i) {
      ctx[i] = fwd[i];
      ctx[i].insert(ctx[i].end(), bwd[n - 1 - i].begin(), bwd[n - 1 - i].end());
      if (ctx[i].size() != 2 * hid) throw std::logic_error("context width");
    }

    double ll = 0.0;
    // Word level: P(c_i | c_<i, X).
    std::vector<Vec> word_inputs;
    int prev = kStartLabel;
    for (size_t i = 0; i < n; ++i) {
      Vec in = ctx[i];
      append_row(in, "word_decoder.label_embedding", prev);
      word_inputs.push_back(in);
      prev = static_cast<int>(ex.word_labels[i]);
    }
    auto word_out = run_stack("word_decoder", config_.decoder_layers, word_inputs);
    for (size_t i = 0; i < n; ++i) {
      ll += log_prob("word_decoder.output", word_out[i], static_cast<int>(ex.word_labels[i]));
    }
    // Character level for gold OTHER words: P(y_i^j | y_i^<j, X).
    for (size_t i = 0; i < n; ++i) {
      if (ex.word_labels[i] != WordLabel::kOther) continue;
      const std::u32string chars = decode_utf8(ex.input[i]);
      std::vector<Vec> inputs;
      int prev_case = kStartLabel;
      for (size_t j = 0; j < chars.size(); ++j) {
        Vec in = ctx[i];
        auto it = char_rows_.find(chars[j]);
        append_row(in, "char_decoder.char_embedding", it == char_rows_.end() ? 0 : it->second);
        append_row(in, "char_decoder.case_embedding", prev_case);
        inputs.push_back(in);
        prev_case = static_cast<int>(ex.char_labels[i][j]);
      }
      auto out = run_stack("char_decoder", config_.decoder_layers, inputs);
      for (size_t j = 0; j < chars.size(); ++j) {
        ll += log_prob("char_decoder.output", out[j], static_cast<int>(ex.char_labels[i][j]));
      }
    }
    return ll;
  }

 private:
  struct Tensor64 {
    std::vector<std::uint32_t> dims;
    std::vector<double> data;
  };

  static double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  // Row r of matrix `name` dotted with x.
  double dot_row(const Tensor64& m, size_t r, const Vec& x) const {
    const size_t cols = m.dims[1];
    if (x.size() != cols) throw std::logic_error("dot_row width");
    double s = 0.0;
    for (size_t c = 0; c < cols; ++c) s += m.data[r * cols + c] * x[c];
    return s;
  }

  void append_row(Vec& v, const std::string& name, int row) const {
    const auto& m = tensors_.at(name);
    const size_t cols = m.dims[1];
    for (size_t c = 0; c < cols; ++c) v.push_back(m.data[row * cols + c]);
  }

  double log_prob(const std::string& prefix, const Vec& h, int target) const {
    const auto& w = tensors_.at(prefix + ".w");
    const auto& b = tensors_.at(prefix + ".b");
    const double z0 = dot_row(w, 0, h) + b.data[0];
    const double z1 = dot_row(w, 1, h) + b.data[1];
    const double m = std::max(z0, z1);
    const double log_z = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    return (target == 0 ? z0 : z1) - log_z;
  }

  std::vector<Vec> run_stack(const std::string& prefix, size_t layers,
                             std::vector<Vec> seq) const {
    for (size_t l = 0; l < layers; ++l) {
      const std::string p = prefix + ".l" + std::to_string(l);
      const auto& wx = tensors_.at(p + ".w_x");
      const auto& wh = tensors_.at(p + ".w_h");
      const auto& bx = tensors_.at(p + ".b_x");
      const bool gru = config_.cell_kind == nn::CellKind::kGru;
      const size_t hid = gru ? wx.dims[0] / 3 : wx.dims[0] / 4;
      Vec h(hid, 0.0), c(hid, 0.0);
      for (auto& x : seq) {
        Vec nh(hid), nc(hid);
        if (gru) {
          const auto& bh = tensors_.at(p + ".b_h");
          for (size_t k = 0; k < hid; ++k) {
            const double r = sig(dot_row(wx, k, x) + bx.data[k] + dot_row(wh, k, h) + bh.data[k]);
            const double z = sig(dot_row(wx, hid + k, x) + bx.data[hid + k] +
                                 dot_row(wh, hid + k, h) + bh.data[hid + k]);
            const double cand = std::tanh(dot_row(wx, 2 * hid + k, x) + bx.data[2 * hid + k] +
                                          r * (dot_row(wh, 2 * hid + k, h) + bh.data[2 * hid + k]));
            nh[k] = (1.0 - z) * cand + z * h[k];
          }
        } else {
          for (size_t k = 0; k < hid; ++k) {
            auto pre = [&](size_t g) {
              return dot_row(wx, g * hid + k, x) + dot_row(wh, g * hid + k, h) +
                     bx.data[g * hid + k];
            };
            const double i = sig(pre(0)), f = sig(pre(1)), g = std::tanh(pre(2)),
                         o = sig(pre(3));
            nc[k] = f * c[k] + i * g;
            nh[k] = o * std::tanh(nc[k]);
          }
          c = nc;
        }
        h = nh;
        x = h;
      }
    }
    return seq;
  }

  ModelConfig config_;
  std::map<std::string, Tensor64> tensors_;
  std::map<char32_t, int> char_rows_;
};

}  // namespace truecase::testing
