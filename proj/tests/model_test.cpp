#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "reference_model.hpp"
#include "test_util.hpp"
#include "truecase/error.hpp"
#include "truecase/model.hpp"
#include "truecase/model_io.hpp"
#include "truecase/train.hpp"

namespace truecase {
namespace {

using testing::random_model;
using testing::tiny_config;

std::vector<Sentence> sample_corpus() {
  return {tokenize("The iPhone is made by Apple ."), tokenize("McDonald's sells burgers"),
          tokenize("Hewlett-Packard and NASA , 42")};
}

TEST(ModelConfig, PresetsMatchHyperParameterTable) {
  const auto t = ModelConfig::teacher();
  EXPECT_EQ(t.input_embedding_size, 512u);
  EXPECT_EQ(t.output_embedding_size, 512u);
  EXPECT_EQ(t.fwd_encoder_layers, 2u);
  EXPECT_EQ(t.bwd_encoder_layers, 2u);
  EXPECT_EQ(t.decoder_layers, 2u);
  EXPECT_EQ(t.encoder_cells_per_layer, 512u);
  EXPECT_EQ(t.decoder_cells_per_layer, 512u);
  EXPECT_EQ(t.max_ngram_order, 3);
  EXPECT_EQ(t.ngram_buckets, 5000u);
  EXPECT_EQ(t.beam_size, 2u);

  const auto s = ModelConfig::student();
  EXPECT_EQ(s.input_embedding_size, 128u);
  EXPECT_EQ(s.output_embedding_size, 128u);
  EXPECT_EQ(s.fwd_encoder_layers, 1u);
  EXPECT_EQ(s.bwd_encoder_layers, 1u);
  EXPECT_EQ(s.decoder_layers, 1u);
  EXPECT_EQ(s.encoder_cells_per_layer, 128u);
  EXPECT_EQ(s.decoder_cells_per_layer, 128u);
  EXPECT_EQ(s.max_ngram_order, 3);
  EXPECT_EQ(s.ngram_buckets, 5000u);
  EXPECT_EQ(s.beam_size, 2u);
  EXPECT_FLOAT_EQ(s.dropout_rate, 0.25f);
  EXPECT_THROW(ModelConfig::preset("huge"), std::invalid_argument);
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  auto c = ModelConfig::student();
  c.cell_kind = nn::CellKind::kLstm;
  c.char_vocab = U"abcé";
  c.char_vocab_size = 5;
  EXPECT_EQ(ModelConfig::from_json(c.to_json()), c);
  c.beam_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_THROW(ModelConfig::from_json("{"), ModelFormatError);
}

TEST(CharVocab, FrequencyOrderWithCap) {
  const auto vocab = build_char_vocab({tokenize("aab B c")}, 3);
  EXPECT_EQ(vocab, U"ab");
  EXPECT_EQ(build_char_vocab({tokenize("x")}, 512), U"x");
}

TEST(EncodeContext, ShapesAndDirectionality) {
  const auto corpus = sample_corpus();
  Model model = random_model(tiny_config(nn::CellKind::kGru), corpus, 3, 0.5f);
  const size_t hid = model.config().encoder_cells_per_layer;

  auto one = model.encode_context(tokenize("word"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.vectors[0].size(), 2 * hid);

  // Reversing the sentence swaps the halves of mirrored positions when both
  // directions share weights.
  auto& p = model.parameters();
  for (const std::string suffix : {".w_x", ".w_h", ".b_x", ".b_h"}) {
    p[*p.find("encoder.bwd.l0" + suffix)] = p[*p.find("encoder.fwd.l0" + suffix)];
  }
  const Sentence s = tokenize("a bb ccc dd");
  Sentence r = s;
  std::reverse(r.tokens.begin(), r.tokens.end());
  const auto cs = model.encode_context(s);
  const auto cr = model.encode_context(r);
  const size_t n = s.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < hid; ++k) {
      EXPECT_FLOAT_EQ(cr.vectors[i][k], cs.vectors[n - 1 - i][hid + k]);
      EXPECT_FLOAT_EQ(cr.vectors[i][hid + k], cs.vectors[n - 1 - i][k]);
    }
  }
}

TEST(EncodeContext, ForwardHalfIsCausal) {
  Model model = random_model(tiny_config(nn::CellKind::kLstm), sample_corpus(), 4, 0.5f);
  const size_t hid = model.config().encoder_cells_per_layer;
  const auto a = model.encode_context(tokenize("one two three four"));
  const auto b = model.encode_context(tokenize("one two other words"));
  for (size_t i = 0; i < 2; ++i) {
    for (size_t k = 0; k < hid; ++k) EXPECT_EQ(a.vectors[i][k], b.vectors[i][k]);
  }
}

TEST(WordLabels, DistributionsNormalizeAndDependOnPreviousLabel) {
  for (auto kind : {nn::CellKind::kGru, nn::CellKind::kLstm}) {
    Model model = random_model(tiny_config(kind, 2), sample_corpus(), 5, 0.5f);
    const auto ctx = model.encode_context(tokenize("the iphone is here"));
    const std::vector<WordLabel> self(4, WordLabel::kSelf);
    auto other = self;
    other[1] = WordLabel::kOther;
    const auto a = model.word_label_log_probs(ctx, self);
    const auto b = model.word_label_log_probs(ctx, other);
    for (const auto& lp : a) EXPECT_NEAR(std::exp(lp[0]) + std::exp(lp[1]), 1.0, 1e-6);
    EXPECT_EQ(a[1], b[1]);
    EXPECT_NE(a[2], b[2]);
  }
}

// Encoder weights zero (context = 0); the word decoder's candidate gate reads
// only the label embedding. Expected values are the hand recurrence
// h1 = tanh(e_start)/2, h2 = tanh(e_prev)/2 + h1/2 with logits (0, 2h).
TEST(WordLabels, HandSetScalarModel) {
  ModelConfig c;
  c.input_embedding_size = c.output_embedding_size = 1;
  c.encoder_cells_per_layer = c.decoder_cells_per_layer = 1;
  c.ngram_buckets = 7;
  c.dropout_rate = 0.0f;
  Model model(c);
  auto& p = model.parameters();
  p[*p.find("word_decoder.label_embedding")].data = {-1.0f, 1.0f, 0.5f};
  p[*p.find("word_decoder.l0.w_x")].data = {0, 0, 0, 0, 0, 0, 0, 0, 1};
  p[*p.find("word_decoder.output.w")].data = {0.0f, 2.0f};

  const auto ctx = model.encode_context(tokenize("x y"));
  auto self = model.word_label_log_probs(ctx, {WordLabel::kSelf, WordLabel::kSelf});
  auto other = model.word_label_log_probs(ctx, {WordLabel::kOther, WordLabel::kSelf});
  EXPECT_NEAR(self[0][0], -0.9506655964724702, 1e-6);
  EXPECT_NEAR(self[0][1], -0.48854843921246044, 1e-6);
  EXPECT_NEAR(self[1][0], -0.46265784655559233, 1e-6);
  EXPECT_NEAR(self[1][1], -0.9931934238813522, 1e-6);
  EXPECT_NEAR(other[1][0], -1.3078957188924758, 1e-6);
  EXPECT_NEAR(other[1][1], -0.31524298430670605, 1e-6);
}

TEST(CharCases, OneDistributionPerCharacter) {
  Model model = random_model(tiny_config(nn::CellKind::kGru), sample_corpus(), 6, 0.5f);
  const auto ex = derive_labels(tokenize("iPhone"));
  EXPECT_EQ(ex.char_labels[0], (std::vector<CaseLabel>{CaseLabel::kLower, CaseLabel::kUpper,
                                                        CaseLabel::kLower, CaseLabel::kLower,
                                                        CaseLabel::kLower, CaseLabel::kLower}));
  const auto ctx = model.encode_context(ex.input);
  const auto lps = model.char_case_log_probs(ctx.vectors[0], U"iphone", ex.char_labels[0]);
  ASSERT_EQ(lps.size(), 6u);
  for (const auto& lp : lps) EXPECT_NEAR(std::exp(lp[0]) + std::exp(lp[1]), 1.0, 1e-6);
  EXPECT_EQ(model.char_case_log_probs(ctx.vectors[0], U"i", {CaseLabel::kUpper}).size(), 1u);
  // Characters outside the vocabulary use the UNK row.
  EXPECT_EQ(model.char_id(U'ж'), 0);
}

TEST(SentenceLogLikelihood, MatchesIndependentDoubleComposition) {
  std::mt19937 rng(8);
  for (auto kind : {nn::CellKind::kGru, nn::CellKind::kLstm}) {
    for (size_t layers : {1u, 2u}) {
      Model model = random_model(tiny_config(kind, layers), sample_corpus(), 10 + layers, 0.4f);
      testing::ReferenceModel ref(model);
      for (const auto& s : sample_corpus()) {
        const auto ex = derive_labels(s);
        const double ll = model.sentence_log_likelihood(ex);
        EXPECT_NEAR(ll, ref.log_likelihood(ex), 1e-5);
        EXPECT_LT(ll, 0.0);
        // The training path computes the same quantity.
        auto grads = model.parameters().zeros_like();
        EXPECT_NEAR(model.accumulate_gradients(model.prepare(ex), grads, 1.0f, {}), -ll, 1e-4);
      }
    }
  }
}

TEST(SentenceLogLikelihood, AllSelfSentenceHasOnlyWordTerm) {
  Model model = random_model(tiny_config(nn::CellKind::kGru), sample_corpus(), 12, 0.5f);
  const auto ex = derive_labels(tokenize("all lower case words"));
  const auto ctx = model.encode_context(ex.input);
  double word_term = 0.0;
  for (const auto& lp : model.word_label_log_probs(ctx, ex.word_labels)) word_term += lp[0];
  EXPECT_NEAR(model.sentence_log_likelihood(ex), word_term, 1e-6);
}

TEST(SentenceLogLikelihood, SaturatedModelApproachesZero) {
  Model model = random_model(tiny_config(nn::CellKind::kGru), sample_corpus(), 13, 0.1f);
  auto& p = model.parameters();
  p[*p.find("word_decoder.output.b")].data = {60.0f, 0.0f};
  const auto ex = derive_labels(tokenize("nothing to change here"));
  const double ll = model.sentence_log_likelihood(ex);
  EXPECT_LE(ll, 0.0);
  EXPECT_GT(ll, -1e-6);
  auto grads = p.zeros_like();
  model.accumulate_gradients(model.prepare(ex), grads, 1.0f, {});
  EXPECT_LT(std::sqrt(grads.squared_norm()), 1e-12);
}

TEST(Gradients, MatchFiniteDifferencesOfDoubleOracle) {
  for (auto kind : {nn::CellKind::kGru, nn::CellKind::kLstm}) {
    for (size_t layers : {1u, 2u}) {
      const auto corpus = sample_corpus();
      Model model = random_model(tiny_config(kind, layers), corpus, 20 + layers, 0.3f);
      std::vector<TrainingExample> batch;
      for (const auto& s : corpus) batch.push_back(derive_labels(s));
      for (const auto& check : testing::gradient_check(model, batch)) {
        EXPECT_LE(check.max_relative_error, 1e-3)
            << check.name << (kind == nn::CellKind::kGru ? " gru" : " lstm") << " layers "
            << layers;
      }
    }
  }
}

TEST(Gradients, AdditiveOverExamples) {
  const auto corpus = sample_corpus();
  Model model = random_model(tiny_config(nn::CellKind::kLstm), corpus, 30, 0.3f);
  const auto a = model.prepare(derive_labels(corpus[0]));
  const auto b = model.prepare(derive_labels(corpus[1]));
  auto ga = model.parameters().zeros_like();
  auto gb = ga, gab = ga;
  model.accumulate_gradients(a, ga, 1.0f, {});
  model.accumulate_gradients(b, gb, 1.0f, {});
  model.accumulate_gradients(a, gab, 1.0f, {});
  model.accumulate_gradients(b, gab, 1.0f, {});
  for (size_t t = 0; t < ga.size(); ++t) {
    for (size_t k = 0; k < ga[t].data.size(); ++k) {
      ASSERT_NEAR(gab[t].data[k], ga[t].data[k] + gb[t].data[k], 1e-5);
    }
  }
}

TEST(Serialization, RoundTripIsBitExact) {
  Model model = random_model(tiny_config(nn::CellKind::kLstm, 2), sample_corpus(), 40, 0.5f);
  const std::string bytes = serialize_model(model);
  ASSERT_EQ(bytes.substr(0, 4), "HTRC");
  EXPECT_EQ(bytes[4], 1);
  const Model loaded = deserialize_model(bytes);
  EXPECT_EQ(loaded.config(), model.config());
  EXPECT_EQ(loaded.parameters(), model.parameters());
  EXPECT_EQ(serialize_model(loaded), bytes);
}

TEST(Serialization, RejectsMalformedFiles) {
  Model model = random_model(tiny_config(nn::CellKind::kGru), sample_corpus(), 41, 0.5f);
  const std::string bytes = serialize_model(model);
  EXPECT_THROW(deserialize_model("XTRC" + bytes.substr(4)), ModelFormatError);
  EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 1)), ModelFormatError);
  EXPECT_THROW(deserialize_model(bytes + "x"), ModelFormatError);
  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  EXPECT_THROW(deserialize_model(wrong_version), ModelFormatError);
  EXPECT_THROW(deserialize_model(""), ModelFormatError);
}

}  // namespace
}  // namespace truecase
