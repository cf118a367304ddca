#include <algorithm>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_util.hpp"
#include "truecase/eval.hpp"

namespace truecase {
namespace {

std::vector<Sentence> lines(std::initializer_list<const char*> text) {
  std::vector<Sentence> out;
  for (const char* t : text) out.push_back(tokenize(t));
  return out;
}

TEST(Score, HandCountedExample) {
  const auto r = score(lines({"Apple is good Friend"}), lines({"Apple is Good friend"}));
  EXPECT_EQ(r.nl_predictions, 2u);
  EXPECT_EQ(r.nl_references, 2u);
  EXPECT_EQ(r.nl_correct, 1u);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 0.5);
}

TEST(Score, IdenticalCorporaArePerfect) {
  const auto ref = lines({"The iPhone is here", "NASA launched it"});
  const auto r = score(ref, ref);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
  EXPECT_DOUBLE_EQ(r.first_word_accuracy, 1.0);
}

TEST(Score, ZeroDenominatorConventions) {
  const auto lower = lines({"apple is good"});
  const auto upper = lines({"Apple is good"});
  auto r = score(lower, upper);
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.f1, 0.0);
  r = score(upper, lower);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
  EXPECT_DOUBLE_EQ(r.f1, 0.0);
  r = score(lower, lower);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
  r = score({}, {});
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
  EXPECT_DOUBLE_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Score, HarmonicMeanBoundsUnderFuzz) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Sentence> hyp, ref;
    for (int line = 0; line < 3; ++line) {
      const Sentence base = testing::random_sentence(rng, 5, 4);
      Sentence h = base, r = base;
      for (size_t i = 0; i < base.size(); ++i) {
        if (rng() % 3 == 0) h.tokens[i] = testing::random_recase(h.tokens[i], rng);
        if (rng() % 3 == 0) r.tokens[i] = testing::random_recase(r.tokens[i], rng);
      }
      hyp.push_back(h);
      ref.push_back(r);
    }
    const auto m = score(hyp, ref);
    EXPECT_LE(m.nl_correct, std::min(m.nl_predictions, m.nl_references));
    if (m.precision > 0 && m.recall > 0) {
      EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-12);
      EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-12);
      EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
    }
    // Permuting lines identically leaves the score unchanged.
    auto hp = hyp, rp = ref;
    std::reverse(hp.begin(), hp.end());
    std::reverse(rp.begin(), rp.end());
    const auto p = score(hp, rp);
    EXPECT_EQ(p.nl_correct, m.nl_correct);
    EXPECT_DOUBLE_EQ(p.f1, m.f1);
  }
}

TEST(FirstWord, Accuracy) {
  EXPECT_DOUBLE_EQ(first_word_accuracy(lines({"a b", "c d"}), lines({"a b", "c d"})), 1.0);
  EXPECT_DOUBLE_EQ(first_word_accuracy(lines({"A b", "C d"}), lines({"a b", "c d"})), 0.0);
  EXPECT_DOUBLE_EQ(first_word_accuracy(lines({"A b", "c d"}), lines({"A b", "C d"})), 0.5);
}

TEST(PerClass, CountsPartitionTokens) {
  auto classes = per_class_report(lines({"iPhone"}), lines({"Iphone"}));
  EXPECT_EQ(classes[static_cast<int>(WordClass::kUC)].count, 1u);
  classes = per_class_report(lines({"Iphone"}), lines({"iPhone"}));
  EXPECT_EQ(classes[static_cast<int>(WordClass::kMC)].count, 1u);
  EXPECT_EQ(classes[static_cast<int>(WordClass::kMC)].correct, 0u);

  const auto ref = lines({"The iPhone and NASA , 42 apples", "McDonald's is OK"});
  classes = per_class_report(ref, ref);
  size_t total = 0;
  for (const auto& c : classes) {
    total += c.count;
    EXPECT_EQ(c.correct, c.count);
  }
  EXPECT_EQ(total, 10u);
  EXPECT_EQ(classes[static_cast<int>(WordClass::kLC)].count, 5u);
  EXPECT_EQ(classes[static_cast<int>(WordClass::kUC)].count, 1u);
  EXPECT_EQ(classes[static_cast<int>(WordClass::kCA)].count, 2u);
  EXPECT_EQ(classes[static_cast<int>(WordClass::kMC)].count, 2u);
}

TEST(Score, MismatchesAreErrors) {
  try {
    score(lines({"a", "b"}), lines({"a"}));
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
  EXPECT_THROW(score(lines({"a b"}), lines({"a"})), AlignmentError);
  try {
    score(lines({"a", "x cat"}), lines({"a", "x dog"}));
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_NO_THROW(score(lines({"APPLE"}), lines({"apple"})));
}

TEST(Report, JsonCarriesAllFields) {
  const auto r = score(lines({"Apple is good Friend"}), lines({"Apple is Good friend"}));
  const auto j = nlohmann::json::parse(r.to_json());
  for (const char* key : {"nl_predictions", "nl_references", "nl_correct", "precision", "recall",
                          "f1", "first_word_accuracy", "per_class"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_DOUBLE_EQ(j["f1"].get<double>(), 0.5);
  EXPECT_NE(r.to_table().find("F1"), std::string::npos);
}

}  // namespace
}  // namespace truecase
