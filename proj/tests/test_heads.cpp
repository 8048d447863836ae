#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphtag/heads.hpp"
#include "oracles.hpp"

namespace graphtag {
namespace {

using testing::label_ref;
using testing::random_tensor;
using testing::softmax_ref;

TEST(ArcScores, MatchDirectLoops) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 6, d = 4;  // ROOT plus five tokens
    const Tensor dep = random_tensor({n, d}, rng), head = random_tensor({n, d}, rng),
                 w = random_tensor({d, d}, rng), b = random_tensor({d}, rng);
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<double> s(n);
      for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
          v += head.at(j, a) * b[a];
          for (std::size_t c = 0; c < d; ++c) v += head.at(j, a) * w.at(a, c) * dep.at(i, c);
        }
        s[j] = v;
      }
      const auto want = softmax_ref(s);
      const Tensor got = arc_distribution(dep, head, w, b, i);
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
    }
  }
}

TEST(ArcScores, ZeroParametersGiveUniformHeads) {
  Rng rng(1);
  const Tensor dep = random_tensor({5, 3}, rng), head = random_tensor({5, 3}, rng);
  const Tensor p = arc_distribution(dep, head, Tensor({3, 3}), Tensor({3}), 2);
  for (double v : p.data()) EXPECT_NEAR(v, 0.2, 1e-15);
}

TEST(ArcScores, DistributionsSumToOne) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor dep = random_tensor({7, 5}, rng, 3.0), head = random_tensor({7, 5}, rng, 3.0),
                 w = random_tensor({5, 5}, rng, 3.0), b = random_tensor({5}, rng);
    for (std::size_t i = 1; i < 7; ++i) {
      const Tensor p = arc_distribution(dep, head, w, b, i);
      EXPECT_NEAR(std::accumulate(p.data().begin(), p.data().end(), 0.0), 1.0, 1e-9);
      EXPECT_TRUE(p.all_finite());
    }
  }
}

TEST(ArcScores, RootTakesNoHead) {
  Rng rng(3);
  const Tensor m = random_tensor({3, 2}, rng);
  EXPECT_THROW(arc_distribution(m, m, Tensor({2, 2}), Tensor({2}), 0), Error);
}

TEST(ArcScores, PermutingCandidatesPermutesProbabilities) {
  Rng rng(4);
  const std::size_t n = 6, d = 3;
  const Tensor dep = random_tensor({n, d}, rng), head = random_tensor({n, d}, rng),
               w = random_tensor({d, d}, rng), b = random_tensor({d}, rng);
  std::vector<std::size_t> perm{0, 3, 5, 1, 2, 4};
  Tensor permuted(head.shape());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t a = 0; a < d; ++a) permuted.at(j, a) = head.at(perm[j], a);
  }
  const Tensor p = arc_distribution(dep, head, w, b, 2);
  const Tensor q = arc_distribution(dep, permuted, w, b, 2);
  for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(q[j], p[perm[j]], 1e-14);
}

TEST(ArcScores, HeadIndependentShiftKeepsArgmax) {
  // Adding c to every score of a row leaves the distribution unchanged.
  Rng rng(5);
  Tape tape;
  const Tensor dep = random_tensor({4, 3}, rng), head = random_tensor({4, 3}, rng),
               w = random_tensor({3, 3}, rng), b = random_tensor({3}, rng);
  const Tensor s = arc_scores(tape.constant(dep), tape.constant(head), tape.constant(w),
                              tape.constant(b)).value();
  Tensor shifted = s;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) shifted.at(i, j) += 2.5 * (i + 1);
  }
  EXPECT_LT(max_abs_diff(softmax_rows(s), softmax_rows(shifted)), 1e-14);
}

TEST(LabelScores, MatchTripleLoop) {
  for (bool uses_dep : {false, true}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(100 + seed);
      const std::size_t n = 5, d = 4, r = 3;
      const Tensor rd = random_tensor({n, d}, rng), rh = random_tensor({n, d}, rng),
                   u = random_tensor({d, d, r}, rng), w = random_tensor({r, d}, rng),
                   b = random_tensor({r}, rng);
      const std::size_t i = 1 + rng.below(n - 1), p = rng.below(n);
      std::vector<double> s(r);
      for (std::size_t k = 0; k < r; ++k) s[k] = label_ref(rd, rh, u, w, b, i, p, k, uses_dep);
      const auto want = softmax_ref(s);
      const Tensor got = label_distribution(rd, rh, u, w, b, i, p, uses_dep);
      for (std::size_t k = 0; k < r; ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
    }
  }
}

TEST(LabelScores, BiasAloneDecidesWhenWeightsAreZero) {
  Rng rng(6);
  const Tensor rd = random_tensor({4, 3}, rng), rh = random_tensor({4, 3}, rng);
  Tensor b({5});
  b[3] = 10.0;
  for (std::size_t i = 1; i < 4; ++i) {
    for (std::size_t p = 0; p < 4; ++p) {
      const Tensor l = label_distribution(rd, rh, Tensor({3, 3, 5}), Tensor({5, 3}), b, i, p, false);
      EXPECT_EQ(std::max_element(l.data().begin(), l.data().end()) - l.data().begin(), 3);
      EXPECT_NEAR(std::accumulate(l.data().begin(), l.data().end(), 0.0), 1.0, 1e-9);
    }
  }
}

TEST(LabelScores, HeadOutOfRangeIsAnError) {
  Rng rng(7);
  const Tensor m = random_tensor({3, 2}, rng);
  EXPECT_THROW(label_distribution(m, m, Tensor({2, 2, 2}), Tensor({2, 2}), Tensor({2}), 1, 3, false),
               Error);
}

TEST(TagScores, MatchDirectLoops) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(200 + seed);
    const Tensor h = random_tensor({3, 6}, rng), w = random_tensor({4, 6}, rng),
                 b = random_tensor({4}, rng);
    const Tensor got = tag_distribution(h, w, b);
    for (std::size_t t = 0; t < 3; ++t) {
      std::vector<double> s(4);
      for (std::size_t k = 0; k < 4; ++k) {
        s[k] = b[k];
        for (std::size_t a = 0; a < 6; ++a) s[k] += w.at(k, a) * h.at(t, a);
      }
      const auto want = softmax_ref(s);
      for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(got.at(t, k), want[k], 1e-12);
    }
  }
}

TEST(TagScores, ZeroWeightsGiveUniform) {
  Rng rng(8);
  const Tensor p = tag_distribution(random_tensor({2, 3}, rng), Tensor({9, 3}), Tensor({9}));
  for (double v : p.data()) EXPECT_NEAR(v, 1.0 / 9.0, 1e-15);
}

TEST(TagScores, LargeScaleSharpensToOneHot) {
  Rng rng(9);
  const Tensor h = random_tensor({1, 3}, rng);
  Tensor w = random_tensor({5, 3}, rng);
  for (auto& v : w.storage()) v *= 1e4;
  const Tensor p = tag_distribution(h, w, Tensor({5}));
  EXPECT_NEAR(*std::max_element(p.data().begin(), p.data().end()), 1.0, 1e-9);
}

TEST(ScoringHeads, OutputShapes) {
  Rng rng(10);
  ParamStore store;
  HeadConfig cfg;
  cfg.arc_dim = 6;
  cfg.rel_dim = 3;
  cfg.pos_dim = 5;
  cfg.stag_dim = 5;
  ScoringHeads heads(cfg, {8, 7, 4, 9, true}, store, rng);
  Tape tape;
  const HeadOutputs out = heads.forward(tape, tape.constant(random_tensor({5, 8}, rng)), true, nullptr);
  EXPECT_EQ(out.arc.shape(), (Shape{5, 5}));
  EXPECT_EQ(out.rel_dep.shape(), (Shape{5, 3}));
  EXPECT_EQ(out.pos.shape(), (Shape{4, 4}));
  EXPECT_EQ(out.stag.shape(), (Shape{4, 9}));
  const std::vector<int> deps{1, 2, 3, 4}, hs{0, 1, 1, 3};
  EXPECT_EQ(heads.labels(tape, out, deps, hs).shape(), (Shape{4, 7}));
  EXPECT_TRUE(out.arc.value().all_finite());
  EXPECT_EQ(store.get("heads.U_rel").shape(), (Shape{3, 3, 7}));
}

TEST(ScoringHeads, TaggerHeadsNeedNoRoot) {
  Rng rng(11);
  ParamStore store;
  HeadConfig cfg;
  cfg.stag_dim = 4;
  ScoringHeads heads(cfg, {6, 0, 0, 5, false}, store, rng);
  Tape tape;
  const HeadOutputs out = heads.forward(tape, tape.constant(random_tensor({3, 6}, rng)), false, nullptr);
  EXPECT_EQ(out.stag.shape(), (Shape{3, 5}));
  EXPECT_FALSE(out.arc.valid());
  EXPECT_EQ(store.find("heads.W_arc"), nullptr);
}

TEST(ScoringHeads, GradientCheck) {
  Rng rng(12);
  ParamStore store;
  HeadConfig cfg;
  cfg.arc_dim = 4;
  cfg.rel_dim = 3;
  cfg.pos_dim = 3;
  cfg.stag_dim = 3;
  ScoringHeads heads(cfg, {5, 4, 3, 4, true}, store, rng);
  for (Parameter* p : store.all()) p->value = random_tensor(p->value.shape(), rng);
  const Tensor x = random_tensor({4, 5}, rng);
  const std::vector<int> arc_targets{-1, 2, 0, 1}, deps{1, 2, 3}, hs{2, 0, 1}, rel_targets{3, 0, 2},
      tags{1, 0, 2}, stags{3, 1, 0};
  auto loss = [&](Tape& tape) {
    const HeadOutputs out = heads.forward(tape, tape.constant(x), true, nullptr);
    Var l = cross_entropy_with_logits(out.arc, arc_targets);
    l = add(l, cross_entropy_with_logits(heads.labels(tape, out, deps, hs), rel_targets));
    l = add(l, cross_entropy_with_logits(out.pos, tags));
    return add(l, cross_entropy_with_logits(out.stag, stags));
  };
  EXPECT_LT(testing::parameter_gradient_error(store, loss), 1e-6);
}

}  // namespace
}  // namespace graphtag
