#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "graphtag/analogy.hpp"
#include "graphtag/eval.hpp"
#include "graphtag/rng.hpp"
#include "graphtag/synthetic.hpp"
#include "graphtag/tensor.hpp"
#include "graphtag/unicode.hpp"
#include "fixtures.hpp"

namespace graphtag {
namespace {

using testing::bucket_fixture;
using testing::random_predictions;

Sentence tree(std::vector<std::string> forms, std::vector<int> heads, std::vector<std::string> rels) {
  return testing::flat_tree(std::move(forms), std::move(heads), std::move(rels));
}


TEST(Attachment, IdenticalCorporaScoreHundred) {
  const Corpus gold = synthetic_corpus(20, 3);
  const AttachmentScores s = las_uas(gold, gold);
  EXPECT_DOUBLE_EQ(s.uas, 100.0);
  EXPECT_DOUBLE_EQ(s.las, 100.0);
}

TEST(Attachment, WrongLabelsOnlyCostLas) {
  Corpus gold = synthetic_corpus(20, 4);
  Corpus pred = gold;
  for (Sentence& s : pred) {
    for (Token& t : s.tokens) t.rel = t.rel == "1" ? "0" : "1";
  }
  const AttachmentScores s = las_uas(pred, gold);
  EXPECT_DOUBLE_EQ(s.uas, 100.0);
  EXPECT_DOUBLE_EQ(s.las, 0.0);
}

TEST(Attachment, PunctuationIsNotScored) {
  // "Hi there ." with the period attached to the wrong head
  const Corpus gold{tree({"Hi", "there", "."}, {0, 1, 1}, {"ROOT", "adj", "adj"})};
  const Corpus pred{tree({"Hi", "there", "."}, {0, 1, 2}, {"ROOT", "adj", "0"})};
  const AttachmentScores s = las_uas(pred, gold);
  EXPECT_EQ(s.scored, 2u);
  EXPECT_DOUBLE_EQ(s.uas, 100.0);
  EXPECT_DOUBLE_EQ(s.las, 100.0);

  const Corpus pred2{tree({"Hi", "there", "."}, {0, 3, 2}, {"ROOT", "adj", "0"})};
  EXPECT_DOUBLE_EQ(las_uas(pred2, gold).uas, 50.0);
}

TEST(Attachment, PunctuationClasses) {
  for (const char* p : {".", ",", "--", "...", "?!", "``", "''", "-LRB-", "…", "«", "(", "^"}) {
    const bool expect = std::string(p) != "-LRB-";
    EXPECT_EQ(is_pure_punctuation(p), expect) << p;
  }
  for (const char* w : {"a", "3.5", "U.S.", "", "$"}) EXPECT_FALSE(is_pure_punctuation(w)) << w;
}

TEST(Attachment, LabelCaseIsCanonical) {
  const Corpus gold{tree({"a", "b"}, {2, 0}, {"ADJ", "ROOT"})};
  const Corpus pred{tree({"a", "b"}, {2, 0}, {"adj", "ROOT"})};
  EXPECT_DOUBLE_EQ(las_uas(pred, gold).las, 100.0);
}

TEST(Attachment, MisalignedCorporaAreErrors) {
  const Corpus gold = synthetic_corpus(3, 1);
  Corpus pred = gold;
  pred.pop_back();
  EXPECT_THROW(las_uas(pred, gold), Error);
  pred = gold;
  pred[1].tokens.pop_back();
  EXPECT_THROW(las_uas(pred, gold), Error);
  EXPECT_THROW(f1_by_bucket(pred, gold, BucketKey::dep_length), Error);
}


TEST(Attachment, LasNeverExceedsUas) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const Corpus gold = synthetic_corpus(2, static_cast<std::uint64_t>(trial));
    const AttachmentScores s = las_uas(random_predictions(gold, rng), gold);
    ASSERT_LE(s.las, s.uas);
    ASSERT_GE(s.las, 0.0);
    ASSERT_LE(s.uas, 100.0);
  }
}

TEST(Attachment, InvariantUnderSentenceReordering) {
  Rng rng(12);
  const Corpus gold = synthetic_corpus(30, 5);
  const Corpus pred = random_predictions(gold, rng);
  std::vector<std::size_t> order(gold.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  rng.shuffle(order);
  Corpus g2, p2;
  for (std::size_t k : order) {
    g2.push_back(gold[k]);
    p2.push_back(pred[k]);
  }
  const MetricReport a = evaluate_corpus(pred, gold), b = evaluate_corpus(p2, g2);
  EXPECT_DOUBLE_EQ(a.attachment.las, b.attachment.las);
  EXPECT_DOUBLE_EQ(a.attachment.uas, b.attachment.uas);
  EXPECT_DOUBLE_EQ(a.tagging.all_correct, b.tagging.all_correct);
  for (std::size_t k = 0; k < kBucketCount; ++k) {
    EXPECT_DOUBLE_EQ(a.by_length[k].f1(), b.by_length[k].f1());
    EXPECT_DOUBLE_EQ(a.by_depth[k].f1(), b.by_depth[k].f1());
  }
}


TEST(Buckets, DependencyLengthMatchesHandCount) {
  const auto [pred, gold] = bucket_fixture();
  const auto b = f1_by_bucket(pred, gold, BucketKey::dep_length);
  EXPECT_EQ(b[0].pred, 18u);
  EXPECT_EQ(b[0].pred_hit, 15u);
  EXPECT_EQ(b[0].gold, 20u);
  EXPECT_EQ(b[0].gold_hit, 15u);
  EXPECT_NEAR(b[0].precision(), 100.0 * 15 / 18, 1e-9);
  EXPECT_NEAR(b[0].recall(), 75.0, 1e-9);
  EXPECT_NEAR(b[0].f1(), 100.0 * 30 / 38, 1e-9);
  EXPECT_EQ(b[1].pred, 12u);
  EXPECT_EQ(b[1].gold, 10u);
  EXPECT_NEAR(b[1].f1(), 100.0 * 20 / 22, 1e-9);
  for (std::size_t k = 2; k < kBucketCount; ++k) EXPECT_TRUE(b[k].empty());
}

TEST(Buckets, RootDistanceMatchesHandCount) {
  const auto [pred, gold] = bucket_fixture();
  const auto b = f1_by_bucket(pred, gold, BucketKey::root_distance);
  EXPECT_DOUBLE_EQ(b[0].f1(), 100.0);
  EXPECT_EQ(b[1].pred, 18u);
  EXPECT_EQ(b[1].gold, 20u);
  EXPECT_NEAR(b[1].f1(), 100.0 * 30 / 38, 1e-9);
  EXPECT_EQ(b[2].pred, 2u);
  EXPECT_EQ(b[2].gold, 0u);
  EXPECT_DOUBLE_EQ(b[2].f1(), 0.0);
}

TEST(Buckets, IdenticalIsHundredDisjointIsZero) {
  const Corpus gold = synthetic_corpus(40, 8);
  for (BucketKey key : {BucketKey::dep_length, BucketKey::root_distance}) {
    for (const BucketScore& b : f1_by_bucket(gold, gold, key)) {
      if (!b.empty()) {
        EXPECT_DOUBLE_EQ(b.f1(), 100.0);
      }
    }
    Corpus pred = gold;
    for (Sentence& s : pred) {
      for (Token& t : s.tokens) t.rel = "other";
    }
    for (const BucketScore& b : f1_by_bucket(pred, gold, key)) EXPECT_DOUBLE_EQ(b.f1(), 0.0);
  }
}

TEST(Buckets, LongArcsShareTheLastBucket) {
  Sentence g;
  for (int i = 1; i <= 14; ++i) g.tokens.push_back({"w", "NN", "NN", "t", i == 1 ? 0 : 1, i == 1 ? "ROOT" : "adj"});
  const auto b = f1_by_bucket({g}, {g}, BucketKey::dep_length);
  EXPECT_EQ(b[10].gold, 3u);  // lengths 11, 12 and 13
  EXPECT_EQ(b[0].gold, 2u);   // the root arc of token 1 and the arc of token 2
  std::ostringstream tsv;
  write_bucket_tsv(tsv, b);
  EXPECT_NE(tsv.str().find("\n11+\t"), std::string::npos);
}

TEST(Depth, UnreachableTokensGetZero) {
  EXPECT_EQ(root_distances({-1, 0, 1, 2}), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(root_distances({-1, 0, 3, 2}), (std::vector<std::size_t>{0, 1, 0, 0}));
}

TEST(Tagging, AllCorrectNeedsEveryColumn) {
  Corpus gold{tree({"a", "b"}, {2, 0}, {"0", "ROOT"})};
  Corpus pred = gold;
  pred[0].tokens[0].pred_pos = "VB";
  const TaggingScores with = tagging_scores(pred, gold, true);
  EXPECT_DOUBLE_EQ(with.pos, 50.0);
  EXPECT_DOUBLE_EQ(with.all_correct, 50.0);
  EXPECT_DOUBLE_EQ(tagging_scores(pred, gold, false).all_correct, 100.0);
  pred[0].tokens[1].supertag = "t9";
  EXPECT_DOUBLE_EQ(tagging_scores(pred, gold, false).supertag, 50.0);
}

TEST(Analogy, ConstructedEmbeddingsAreSolved) {
  Rng rng(5);
  const ConstructedAnalogies c = constructed_analogies(20, 30, rng);
  const AnalogyResult r = analogy_eval(c.embeddings, c.equations, c.candidates);
  EXPECT_DOUBLE_EQ(r.percent_correct, 100.0);
  EXPECT_DOUBLE_EQ(r.average_rank, 1.0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Analogy, HandRanking) {
  // rows: a=(1,0) b=(0,1) c=(0,1) -> q=(1,0); d1=(1,0.1) d2=(0.2,1) d3=(-1,0)
  Tensor e(Shape{6, 2}, {1, 0, 0, 1, 0, 1, 1, 0.1, 0.2, 1, -1, 0});
  const std::vector<int> cand{0, 1, 2, 3, 4, 5};
  const std::vector<AnalogyEquation> eqs{{0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 2, 5}};
  const AnalogyResult r = analogy_eval(e, eqs, cand);
  EXPECT_EQ(r.ranks, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_NEAR(r.percent_correct, 100.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(r.average_rank, 2.0);
}

TEST(Analogy, RandomEmbeddingsScoreNearChance) {
  Rng rng(21);
  const std::size_t candidates = 20, trials = 1000;
  std::vector<int> cand(candidates);
  for (std::size_t k = 0; k < candidates; ++k) cand[k] = static_cast<int>(k);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Tensor e(Shape{candidates, 10});
    for (double& v : e.data()) v = rng.normal();
    const AnalogyEquation eq{0, 1, 2, 3};
    hits += analogy_eval(e, std::span(&eq, 1), cand).ranks[0] == 1;
  }
  const double p = 1.0 / static_cast<double>(candidates - 3);
  const double sigma = std::sqrt(trials * p * (1 - p));
  EXPECT_LE(std::abs(static_cast<double>(hits) - trials * p), 3 * sigma);
}

TEST(Analogy, ScaleInvariant) {
  Rng rng(8);
  Tensor e(Shape{30, 6});
  for (double& v : e.data()) v = rng.normal();
  std::vector<int> cand(30);
  for (int k = 0; k < 30; ++k) cand[k] = k;
  std::vector<AnalogyEquation> eqs;
  for (int k = 0; k < 20; ++k) eqs.push_back({k % 30, (k + 5) % 30, (k + 11) % 30, (k + 17) % 30});
  Tensor scaled = e;
  for (double& v : scaled.data()) v *= 37.5;
  const AnalogyResult a = analogy_eval(e, eqs, cand), b = analogy_eval(scaled, eqs, cand);
  EXPECT_EQ(a.ranks, b.ranks);
  EXPECT_EQ(a.percent_correct, b.percent_correct);
}

TEST(Analogy, AnswerOutsideCandidatesIsAnError) {
  Tensor e(Shape{5, 2}, {1, 0, 0, 1, 1, 1, 2, 1, 1, 2});
  const std::vector<int> cand{0, 1, 2, 3};
  const AnalogyEquation eq{0, 1, 2, 4};
  EXPECT_THROW(analogy_eval(e, std::span(&eq, 1), cand), Error);
  const AnalogyEquation same{0, 1, 2, 2};
  EXPECT_THROW(analogy_eval(e, std::span(&same, 1), cand), Error);
}

TEST(Analogy, ZeroNormCandidatesRankLastWithWarning) {
  Tensor e(Shape{6, 2}, {1, 0, 0, 1, 0, 1, 0, 0, -1, 0, 0.5, 0.5});
  const std::vector<int> cand{0, 1, 2, 3, 4, 5};
  const AnalogyEquation eq{0, 1, 2, 3};
  const AnalogyResult r = analogy_eval(e, std::span(&eq, 1), cand);
  EXPECT_EQ(r.ranks[0], 3u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Analogy, MostFrequentBreaksTiesById) {
  const std::vector<std::size_t> counts{0, 5, 3, 5, 0, 1};
  EXPECT_EQ(most_frequent(counts, 3), (std::vector<int>{1, 3, 2}));
  EXPECT_EQ(most_frequent(counts, 10), (std::vector<int>{1, 3, 2, 5}));
}

}  // namespace
}  // namespace graphtag
