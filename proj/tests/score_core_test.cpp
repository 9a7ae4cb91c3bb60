#include "doubt/score_core.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "doubt/extended_real.hpp"
#include "test_util.hpp"

namespace doubt {
namespace {

using testing::random_dyadic_logits;
using testing::random_dyadic_shift;
using testing::random_probability;
using testing::random_simplex;

TEST(ExtendedReal, RejectsNanAndNegativeInfinity) {
  EXPECT_THROW(ExtendedReal(std::nan("")), std::invalid_argument);
  EXPECT_THROW(ExtendedReal(-std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_NO_THROW(ExtendedReal(-3.5));
  EXPECT_NO_THROW((ExtendedReal(std::numeric_limits<double>::infinity())));
}

TEST(ExtendedReal, ReciprocalConventions) {
  EXPECT_TRUE(ExtendedReal(0.0).reciprocal().is_infinite());
  EXPECT_EQ(ExtendedReal::infinity().reciprocal().value(), 0.0);
  EXPECT_DOUBLE_EQ(ExtendedReal(4.0).reciprocal().value(), 0.25);
  EXPECT_DOUBLE_EQ(ExtendedReal(-0.5).reciprocal().value(), -2.0);
  EXPECT_TRUE(reciprocal(0.0).is_infinite());
}

TEST(ArgmaxIndex, Examples) {
  EXPECT_EQ(argmax_index(ProbabilityVector({0.2, 0.7, 0.1})), 1u);
  EXPECT_EQ(argmax_index(ProbabilityVector({0.5, 0.5})), 0u);
  EXPECT_EQ(argmax_index(LogitVector({3.0, 1.0, 3.0})), 0u);
}

TEST(ArgmaxIndex, RejectsShortInput) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(argmax_index(std::span<const double>(one)), std::invalid_argument);
  EXPECT_THROW(argmax_index(std::span<const double>()), std::invalid_argument);
}

TEST(ProbabilityVector, Validation) {
  EXPECT_THROW(ProbabilityVector({0.5, -0.1, 0.6}), std::invalid_argument);
  EXPECT_THROW(ProbabilityVector({0.4, 0.4}), std::invalid_argument);
  EXPECT_THROW(ProbabilityVector({1.0}), std::invalid_argument);
  EXPECT_THROW(ProbabilityVector({0.5, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(ProbabilityVector({0.5, std::numeric_limits<double>::infinity()}),
               std::invalid_argument);
  // tiny negative softmax residue is clamped to zero
  const ProbabilityVector p({1.0, -1e-13});
  EXPECT_EQ(p[1], 0.0);
}

TEST(LogitVector, Validation) {
  EXPECT_THROW(LogitVector({1.0}), std::invalid_argument);
  EXPECT_THROW(LogitVector({1.0, std::numeric_limits<double>::infinity()}), std::invalid_argument);
  EXPECT_NO_THROW(LogitVector({-100.0, 250.0}));
}

TEST(SortDescending, Examples) {
  const SortedProbabilities s = sort_descending(ProbabilityVector({0.1, 0.6, 0.3}));
  EXPECT_EQ(s.probabilities.entries(), (std::vector<double>{0.6, 0.3, 0.1}));
  EXPECT_EQ(s.permutation, (std::vector<std::size_t>{1, 2, 0}));

  const SortedProbabilities tie = sort_descending(ProbabilityVector({0.5, 0.5}));
  EXPECT_EQ(tie.probabilities.entries(), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(tie.permutation, (std::vector<std::size_t>{0, 1}));  // stable

  const SortedProbabilities hot = sort_descending(ProbabilityVector({0.0, 1.0, 0.0}));
  EXPECT_EQ(hot.probabilities.entries(), (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_EQ(hot.permutation, (std::vector<std::size_t>{1, 0, 2}));
}

TEST(SortDescending, PermutationMapsBack) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ProbabilityVector p = random_probability(rng, 2 + trial % 7);
    const SortedProbabilities s = sort_descending(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_EQ(s.probabilities[i], p[s.permutation[i]]);
      if (i + 1 < p.size()) {
        EXPECT_GE(s.probabilities[i], s.probabilities[i + 1]);
      }
    }
  }
}

TEST(PairwiseCertainty, Examples) {
  const CertaintyVector one_hot = pairwise_certainty(ProbabilityVector({1.0, 0.0}));
  EXPECT_EQ(one_hot.argmax_index, 0u);
  EXPECT_EQ(one_hot.scores, (std::vector<double>{1.0, 1.0}));

  const CertaintyVector tie = pairwise_certainty(ProbabilityVector({0.5, 0.5}));
  EXPECT_EQ(tie.argmax_index, 0u);
  EXPECT_EQ(tie.scores, (std::vector<double>{1.0, 0.0}));

  const CertaintyVector mixed = pairwise_certainty(ProbabilityVector({0.6, 0.3, 0.1}));
  EXPECT_EQ(mixed.argmax_index, 0u);
  EXPECT_DOUBLE_EQ(mixed.scores[0], 1.0);
  EXPECT_DOUBLE_EQ(mixed.scores[1], 0.3);
  EXPECT_DOUBLE_EQ(mixed.scores[2], 0.5);
}

TEST(PairwiseDoubt, Examples) {
  const DoubtVector tie = pairwise_doubt(ProbabilityVector({0.5, 0.5}));
  EXPECT_EQ(tie.scores[0].value(), 0.0);
  EXPECT_TRUE(tie.scores[1].is_infinite());

  const DoubtVector one_hot = pairwise_doubt(ProbabilityVector({1.0, 0.0}));
  EXPECT_EQ(one_hot.scores[0].value(), 0.0);
  EXPECT_DOUBLE_EQ(one_hot.scores[1].value(), 1.0);

  const DoubtVector mixed = pairwise_doubt(ProbabilityVector({0.6, 0.3, 0.1}));
  EXPECT_DOUBLE_EQ(mixed.scores[1].value(), 3.3333333333333335);
  EXPECT_DOUBLE_EQ(mixed.scores[2].value(), 2.0);
}

TEST(RawCertainty, Examples) {
  const CertaintyVector r = raw_certainty(LogitVector({2.0, 1.0, 0.0}));
  EXPECT_EQ(r.argmax_index, 0u);
  EXPECT_EQ(r.scores, (std::vector<double>{1.0, 1.0, 2.0}));

  const CertaintyVector tie = raw_certainty(LogitVector({5.0, 5.0}));
  EXPECT_EQ(tie.scores, (std::vector<double>{1.0, 0.0}));

  // constant shift cancels in the margins
  const CertaintyVector shifted = raw_certainty(LogitVector({12.0, 11.0, 10.0}));
  EXPECT_EQ(shifted.scores, r.scores);
}

TEST(RawDoubt, Examples) {
  const DoubtVector r = raw_doubt(LogitVector({2.0, 1.0, 0.0}));
  EXPECT_EQ(r.scores[0].value(), 0.0);
  EXPECT_DOUBLE_EQ(r.scores[1].value(), 1.0);
  EXPECT_DOUBLE_EQ(r.scores[2].value(), 0.5);

  const DoubtVector tie = raw_doubt(LogitVector({5.0, 5.0}));
  EXPECT_TRUE(tie.scores[1].is_infinite());

  const DoubtVector swapped = raw_doubt(LogitVector({0.0, 3.0}));
  EXPECT_EQ(swapped.argmax_index, 1u);
  EXPECT_DOUBLE_EQ(swapped.scores[0].value(), 1.0 / 3.0);
  EXPECT_EQ(swapped.scores[1].value(), 0.0);
}

TEST(RawScores, ExplicitIndexAllowsNegativeMargins) {
  const CertaintyVector c = raw_certainty(LogitVector({1.0, 3.0}), 0);
  EXPECT_EQ(c.scores, (std::vector<double>{1.0, -2.0}));
  const DoubtVector d = raw_doubt(LogitVector({1.0, 3.0}), 0);
  EXPECT_DOUBLE_EQ(d.scores[1].value(), -0.5);
  EXPECT_THROW(raw_certainty(LogitVector({1.0, 3.0}), 5), std::invalid_argument);
}

TEST(NegLogCertainty, Examples) {
  const DoubtVector one_hot = neg_log_certainty(ProbabilityVector({1.0, 0.0}));
  EXPECT_EQ(one_hot.scores[0].value(), 0.0);
  EXPECT_EQ(one_hot.scores[1].value(), 0.0);
  EXPECT_FALSE(std::signbit(one_hot.scores[1].value()));

  const DoubtVector tie = neg_log_certainty(ProbabilityVector({0.5, 0.5}));
  EXPECT_TRUE(tie.scores[1].is_infinite());

  const DoubtVector mixed = neg_log_certainty(ProbabilityVector({0.6, 0.3, 0.1}));
  EXPECT_DOUBLE_EQ(mixed.scores[1].value(), 1.2039728043259361);
  EXPECT_DOUBLE_EQ(mixed.scores[2].value(), 0.6931471805599453);
}

TEST(ScoreProperties, RangeLaw) {
  std::mt19937 rng(101);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  for (int trial = 0; trial < 300; ++trial) {
    const ProbabilityVector p = random_probability(rng, size(rng));
    const double top = p.max_entry();
    const CertaintyVector chi = pairwise_certainty(p);
    const DoubtVector delta = pairwise_doubt(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i == chi.argmax_index) continue;
      EXPECT_GE(chi.scores[i], 0.0);
      EXPECT_LE(chi.scores[i], top);
      if (!delta.scores[i].is_infinite()) {
        EXPECT_GE(delta.scores[i].value(), 1.0 / top);
      }
    }
  }
}

TEST(ScoreProperties, Reciprocity) {
  std::mt19937 rng(102);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  for (int trial = 0; trial < 300; ++trial) {
    const ProbabilityVector p = random_probability(rng, size(rng));
    const CertaintyVector chi = pairwise_certainty(p);
    const DoubtVector delta = pairwise_doubt(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i == chi.argmax_index) continue;
      if (chi.scores[i] == 0.0) {
        EXPECT_TRUE(delta.scores[i].is_infinite());
      } else {
        EXPECT_FALSE(delta.scores[i].is_infinite());
        EXPECT_NEAR(chi.scores[i] * delta.scores[i].value(), 1.0, 1e-12);
      }
    }
  }
}

TEST(ScoreProperties, ShiftInvarianceIsExactOnDyadicInputs) {
  std::mt19937 rng(103);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> base = random_dyadic_logits(rng, size(rng));
    const double shift = random_dyadic_shift(rng);
    std::vector<double> shifted = base;
    for (double& v : shifted) v += shift;
    const CertaintyVector a = raw_certainty(LogitVector(base));
    const CertaintyVector b = raw_certainty(LogitVector(shifted));
    EXPECT_EQ(a.argmax_index, b.argmax_index);
    EXPECT_EQ(a.scores, b.scores);
  }
}

TEST(ScoreProperties, RawCertaintyMatchesLogProbabilityDifferences) {
  std::mt19937 rng(104);
  std::uniform_real_distribution<double> logit(-5.0, 5.0);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(size(rng));
    for (double& v : values) v = logit(rng);
    const LogitVector y(values);
    const ProbabilityVector p = softmax(y);
    const CertaintyVector raw = raw_certainty(y);
    const std::size_t j = raw.argmax_index;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i == j) continue;
      EXPECT_NEAR(raw.scores[i], std::log(p[j]) - std::log(p[i]), 1e-9);
    }
  }
}

TEST(ScoreProperties, PermutationEquivariance) {
  std::mt19937 rng(105);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> values = random_simplex(rng, size(rng));
    std::vector<std::size_t> sigma(values.size());
    std::iota(sigma.begin(), sigma.end(), std::size_t{0});
    std::shuffle(sigma.begin(), sigma.end(), rng);
    std::vector<double> permuted(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) permuted[sigma[i]] = values[i];

    const CertaintyVector original = pairwise_certainty(ProbabilityVector(values));
    const CertaintyVector moved = pairwise_certainty(ProbabilityVector(permuted));
    // generic random draws have a unique argmax
    ASSERT_EQ(moved.argmax_index, sigma[original.argmax_index]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      EXPECT_EQ(moved.scores[sigma[i]], original.scores[i]);
    }
  }
}

TEST(ScoreProperties, NegLogAndDoubtAgreeOnInfinitePartition) {
  std::mt19937 rng(106);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> values = random_simplex(rng, 4);
    if (trial % 3 == 0) {
      values[2] = values[0];  // force a tie with the argmax candidate
      double sum = 0.0;
      for (double v : values) sum += v;
      for (double& v : values) v /= sum;
    }
    const ProbabilityVector p(values);
    const DoubtVector delta = pairwise_doubt(p);
    const DoubtVector neg_log = neg_log_certainty(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_EQ(delta.scores[i].is_infinite(), neg_log.scores[i].is_infinite());
    }
  }
}

TEST(Softmax, MatchesDirectRatios) {
  const LogitVector y({1.0, 2.0, 3.0});
  const ProbabilityVector p = softmax(y);
  double denom = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(p[i], std::exp(y[i]) / denom, 1e-15);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) sum += p[i];
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Softmax, StableForLargeLogits) {
  const ProbabilityVector p = softmax(LogitVector({1000.0, 999.0}));
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

}  // namespace
}  // namespace doubt
