#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graphtag/analogy.hpp"
#include "graphtag/decoder.hpp"
#include "graphtag/eval.hpp"
#include "graphtag/synthetic.hpp"
#include "graphtag/training.hpp"
#include "graphtag/treeops.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace graphtag::testing {
namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void randomize(Model& m, Rng& rng, double scale) {
  for (Parameter* p : m.params().all()) p->value = random_tensor(p->value.shape(), rng, scale);
}

Outcome ac1_gradients() {
  const auto start = std::chrono::steady_clock::now();
  double worst_op = 0.0;
  for (const OpCase& c : op_cases()) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(1000 + seed);
      std::vector<Tensor> inputs;
      for (const auto& s : c.shapes) inputs.push_back(random_tensor(s, rng));
      const std::uint64_t proj_seed = rng.next();
      auto f = [&](Tape& tape, const std::vector<Var>& v) {
        Rng proj(proj_seed);
        Var y = c.op(tape, v);
        return y.shape().empty() ? y : project(tape, y, proj);
      };
      worst_op = std::max(worst_op, gradient_error(f, inputs));
    }
  }

  // Two highway BiLSTM layers under the biaffine and tagging heads.
  const Corpus corpus = synthetic_corpus(20, 5);
  const Vocabulary vocab = Vocabulary::build(corpus);
  double worst_model = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelConfig cfg = tiny_config(Mode::joint_pos_stag);
    cfg.encoder.layers = 2;
    cfg.encoder.highway = true;
    cfg.encoder.hidden = 3;
    Model model(cfg, vocab, seed);
    Rng rng(2000 + seed);
    randomize(model, rng, 0.5);
    const Sentence& s = corpus[seed];
    const EncodedSentence ids = encode_ids(s, vocab);
    const GoldTargets gold = gold_targets(s, vocab);
    worst_model = std::max(
        worst_model, parameter_gradient_error(
                         model.params(), [&](Tape& tape) { return model.loss(tape, ids, gold, nullptr); },
                         1e-5, 4));
  }
  const double secs = seconds_since(start);
  return {worst_op < 1e-5 && worst_model < 1e-5 && secs < 120.0,
          std::to_string(op_cases().size()) + " ops x 20 seeds max rel err " + sci(worst_op) +
              "; composed model x 20 seeds max rel err " + sci(worst_model) + "; " + fmt(secs, 1) +
              " s (limits 1e-5, 120 s)"};
}

Outcome ac2_oracles() {
  double lstm = 0.0, highway = 0.0, arc = 0.0, label = 0.0, joint = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (bool hw : {false, true}) {
      Rng rng(3000 + seed);
      CellFixture f(5, 4, rng, hw);
      const Tensor x = random_tensor({1, 5}, rng), h = random_tensor({1, 4}, rng),
                   c = random_tensor({1, 4}, rng);
      Tape tape;
      const LstmState got = run_cell(tape, f, x, h, c, hw);
      const RefState want = reference_cell(f, x, h, c, hw);
      double& worst = hw ? highway : lstm;
      for (std::size_t k = 0; k < 4; ++k) {
        worst = std::max({worst, std::abs(got.h.value()[k] - want.h[k]), std::abs(got.c.value()[k] - want.c[k])});
      }
    }
    {
      Rng rng(4000 + seed);
      const std::size_t n = 6, d = 4;
      const Tensor dep = random_tensor({n, d}, rng), hd = random_tensor({n, d}, rng),
                   w = random_tensor({d, d}, rng), b = random_tensor({d}, rng);
      for (std::size_t i = 1; i < n; ++i) {
        const auto want = arc_ref(dep, hd, w, b, i);
        const Tensor got = arc_distribution(dep, hd, w, b, i);
        for (std::size_t j = 0; j < n; ++j) arc = std::max(arc, std::abs(got[j] - want[j]));
      }
    }
    for (bool uses_dep : {false, true}) {
      Rng rng(5000 + seed);
      const std::size_t n = 5, d = 4, r = 3;
      const Tensor rd = random_tensor({n, d}, rng), rh = random_tensor({n, d}, rng),
                   u = random_tensor({d, d, r}, rng), w = random_tensor({r, d}, rng),
                   b = random_tensor({r}, rng);
      const std::size_t i = 1 + rng.below(n - 1), p = rng.below(n);
      std::vector<double> s(r);
      for (std::size_t k = 0; k < r; ++k) s[k] = label_ref(rd, rh, u, w, b, i, p, k, uses_dep);
      const auto want = softmax_ref(s);
      const Tensor got = label_distribution(rd, rh, u, w, b, i, p, uses_dep);
      for (std::size_t k = 0; k < r; ++k) label = std::max(label, std::abs(got[k] - want[k]));
    }
  }

  // Summed joint loss against per-task cross-entropies from the raw scores.
  const Corpus corpus = synthetic_corpus(50, 9);
  const Vocabulary vocab = Vocabulary::build(corpus);
  Model model(tiny_config(Mode::joint_pos_stag), vocab, 4);
  Rng rng(6000);
  randomize(model, rng, 0.5);
  const auto& ps = model.params();
  for (const Sentence& s : corpus) {
    const GoldTargets gold = gold_targets(s, vocab);
    Tape tape;
    const HeadOutputs out = model.forward(tape, encode_ids(s, vocab), nullptr);
    const double got = joint_loss(tape, model.heads(), out, gold, Mode::joint_pos_stag).value().item();
    double want = 0.0;
    for (std::size_t i = 1; i <= s.size(); ++i) {
      want += ce(row(out.arc.value(), i), gold.heads[i]);
      std::vector<double> ls(ps.get("heads.b_rel").value.size());
      for (std::size_t k = 0; k < ls.size(); ++k) {
        ls[k] = label_ref(out.rel_dep.value(), out.rel_head.value(), ps.get("heads.U_rel").value,
                          ps.get("heads.W_rel").value, ps.get("heads.b_rel").value, i,
                          static_cast<std::size_t>(gold.heads[i]), k, false);
      }
      want += ce(ls, gold.rels[i]);
      want += ce(row(out.pos.value(), i - 1), gold.pos[i - 1]);
      want += ce(row(out.stag.value(), i - 1), gold.stags[i - 1]);
    }
    joint = std::max(joint, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  const double worst = std::max({lstm, highway, arc, label, joint});
  return {worst <= 1e-12, "50 instances each: lstm " + sci(lstm) + ", highway " + sci(highway) +
                              ", arc " + sci(arc) + ", label " + sci(label) + ", joint loss (relative) " +
                              sci(joint) + " (limit 1e-12)"};
}

Outcome ac3_decoder() {
  Rng rng(7);
  std::size_t valid = 0, greedy_valid = 0, unchanged = 0;
  const std::size_t trials = 5000;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.below(12);
    Tensor raw({n + 1, n + 1});
    const double spread = 1.0 + static_cast<double>(rng.below(6));
    for (auto& v : raw.storage()) v = rng.uniform(-spread, spread);
    const ScoreMatrix s = ScoreMatrix::from_scores(raw);
    const Heads greedy = greedy_heads(s);
    const TreeResult r = enforce_tree(s, greedy);
    valid += valid_tree(r.heads);
    if (valid_tree(greedy)) {
      ++greedy_valid;
      unchanged += r.heads == greedy && r.repairs.empty();
    }
  }
  return {valid == trials && unchanged == greedy_valid,
          std::to_string(valid) + "/" + std::to_string(trials) + " valid trees; " +
              std::to_string(unchanged) + "/" + std::to_string(greedy_valid) +
              " greedy-valid inputs unchanged"};
}

TrainConfig train_config(std::size_t batch, std::size_t max_epochs, std::size_t patience,
                         std::uint64_t seed) {
  TrainConfig tc;
  tc.batch_size = batch;
  tc.max_epochs = max_epochs;
  tc.patience = patience;
  tc.seed = seed;
  return tc;
}

Outcome ac4_overfit() {
  const auto start = std::chrono::steady_clock::now();
  const Corpus corpus = synthetic_corpus(50, 41);
  Model model(small_config(Mode::joint_pos_stag), Vocabulary::build(corpus), 1);
  const TrainResult r = train(model, train_config(10, 200, 200, 1), corpus, corpus);
  const MetricReport m = evaluate_model(model, corpus);
  const double secs = seconds_since(start);
  const bool pass = m.tagging.supertag >= 99 && m.tagging.pos >= 99 && m.attachment.uas >= 99 &&
                    m.attachment.las >= 99 && secs < 600;
  return {pass, "train stag " + fmt(m.tagging.supertag) + " pos " + fmt(m.tagging.pos) + " UAS " +
                    fmt(m.attachment.uas) + " LAS " + fmt(m.attachment.las) + " (best epoch " +
                    std::to_string(r.best_epoch) + " of " + std::to_string(r.history.size()) + ", " +
                    fmt(secs, 1) + " s; limits 99, 200 epochs, 600 s)"};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Train 400 / dev 100 of one 500-sentence corpus.
Outcome ac5_ablation() {
  const auto start = std::chrono::steady_clock::now();
  const Corpus corpus = synthetic_corpus(500, 77);
  const Corpus train_set(corpus.begin(), corpus.begin() + 400);
  const Corpus dev(corpus.begin() + 400, corpus.end());
  auto run = [&](Mode mode, bool shuffled, std::uint64_t seed) {
    const Corpus data = shuffled ? shuffle_stag_targets(train_set, seed) : train_set;
    Model model(small_config(mode), Vocabulary::build(data), seed);
    train(model, train_config(100, 30, 5, seed), data, dev);
    return evaluate_model(model, dev).attachment.las;
  };
  std::vector<double> joint, parser, shuffled;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    joint.push_back(run(Mode::joint_pos_stag, false, seed));
    parser.push_back(run(Mode::parser, false, seed));
    shuffled.push_back(run(Mode::joint_pos_stag, true, seed));
  }
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(x, 1);
    return s;
  };
  const double j = median(joint), p = median(parser), s = median(shuffled);
  return {j >= p && s <= p,
          "median dev LAS joint " + fmt(j) + " [" + list(joint) + "] >= parser " + fmt(p) + " [" +
              list(parser) + "] >= shuffled " + fmt(s) + " [" + list(shuffled) + "]; " +
              fmt(seconds_since(start), 1) + " s"};
}

Outcome ac6_analogy() {
  Rng rng(13);
  const ConstructedAnalogies c = constructed_analogies(25, 50, rng);
  const AnalogyResult built = analogy_eval(c.embeddings, c.equations, c.candidates);

  const std::size_t candidates = 20, trials = 1000;
  std::vector<int> pool(candidates);
  for (std::size_t k = 0; k < candidates; ++k) pool[k] = static_cast<int>(k);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Tensor e(Shape{candidates, 16});
    for (double& v : e.data()) v = rng.normal();
    const AnalogyEquation eq{0, 1, 2, 3};
    hits += analogy_eval(e, std::span(&eq, 1), pool).ranks[0] == 1;
  }
  const double p = 1.0 / static_cast<double>(candidates - 3);
  const double expected = trials * p, sigma = std::sqrt(trials * p * (1 - p));
  const double z = (static_cast<double>(hits) - expected) / sigma;
  return {built.percent_correct == 100.0 && built.average_rank == 1.0 && std::abs(z) <= 3.0,
          "constructed " + fmt(built.percent_correct) + "% avg rank " + fmt(built.average_rank) +
              "; random " + std::to_string(hits) + "/" + std::to_string(trials) + " top-1 vs chance " +
              fmt(expected, 1) + " (z = " + fmt(z) + ")"};
}

Outcome ac7_transformations() {
  const auto fixtures = rule_fixtures();
  std::size_t exact = 0;
  std::set<Rule> covered;
  bool worked = false;
  for (const RuleFixture& f : fixtures) {
    exact += arcs_added(f.graph, f.rule, f.catalog) == f.expected;
    covered.insert(f.rule);
  }
  worked = arcs_added(hoping_for(), Rule::co_anchor).count({4, 8, "1"}) &&
            arcs_added(what_songs(), Rule::wh_word) == ArcSet{{2, 5, "1"}};
  std::size_t replayed = 0;
  for (const RuleFixture& f : fixtures) {
    DepGraph out = f.graph;
    const RuleTrace trace = apply_udr_pipeline(out, f.catalog);
    replayed += format_graph(replay_trace(f.graph, trace)) == format_graph(out);
  }
  return {worked && exact == fixtures.size() && fixtures.size() >= 13 &&
              covered.size() == all_rules().size() && replayed == fixtures.size(),
          std::to_string(exact) + "/" + std::to_string(fixtures.size()) + " fixtures exact over " +
              std::to_string(covered.size()) + "/" + std::to_string(all_rules().size()) +
              " rules; worked examples " + (worked ? "ok" : "wrong") + "; replay " +
              std::to_string(replayed) + "/" + std::to_string(fixtures.size()) + " byte-identical"};
}

Outcome ac8_metrics() {
  Rng rng(17);
  std::size_t ordered = 0;
  for (int t = 0; t < 1000; ++t) {
    const Corpus gold = synthetic_corpus(2, static_cast<std::uint64_t>(t));
    const AttachmentScores s = las_uas(random_predictions(gold, rng), gold);
    ordered += s.las <= s.uas;
  }
  const auto [ppred, pgold] = punctuation_fixture();
  const AttachmentScores punct = las_uas(ppred, pgold);
  const bool punct_ok = punct.scored == 2 && punct.uas == 100.0 && punct.las == 100.0;

  const auto [bpred, bgold] = bucket_fixture();
  const auto len = f1_by_bucket(bpred, bgold, BucketKey::dep_length);
  const auto depth = f1_by_bucket(bpred, bgold, BucketKey::root_distance);
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  const bool buckets_ok = near(len[0].precision(), 1500.0 / 18) && near(len[0].recall(), 75.0) &&
                          near(len[0].f1(), 3000.0 / 38) && near(len[1].f1(), 2000.0 / 22) &&
                          near(depth[0].f1(), 100.0) && near(depth[1].f1(), 3000.0 / 38) &&
                          depth[2].pred == 2 && near(depth[2].f1(), 0.0);
  return {ordered == 1000 && punct_ok && buckets_ok,
          "LAS <= UAS " + std::to_string(ordered) + "/1000; punctuation fixture " +
              (punct_ok ? "matches" : "differs") + "; bucket fixture " + (buckets_ok ? "matches" : "differs") +
              " (length F1 " + fmt(len[0].f1()) + "/" + fmt(len[1].f1()) + ")"};
}

Outcome ac9_jackknife() {
  const Corpus corpus = synthetic_corpus(100, 23);
  const std::size_t k = 10;
  std::vector<std::set<std::string>> trained_ids(k);
  const JackknifeResult r = jackknife(corpus, k, [&](const Corpus& folds, const Corpus& held, std::size_t f) {
    for (const Sentence& s : folds) trained_ids[f].insert(s.id());
    Model model(tiny_config(Mode::supertagger), Vocabulary::build(folds), f);
    train(model, train_config(30, 2, 5, f), folds, held);
    return model.annotate(held);
  });
  std::size_t clean = 0, tagged = 0;
  for (const Sentence& s : r.corpus) {
    const std::string& tag = s.comments.back();
    std::size_t fold = 0, total = 0;
    if (std::sscanf(tag.c_str(), "# jackknife = %zu/%zu", &fold, &total) != 2 || total != k || fold < 1) continue;
    ++tagged;
    clean += trained_ids[fold - 1].count(s.id()) == 0;
  }
  return {tagged == corpus.size() && clean == corpus.size(),
          std::to_string(clean) + "/" + std::to_string(corpus.size()) +
              " sentences predicted by a model that never saw them; " + std::to_string(tagged) +
              " provenance tags"};
}

}  // namespace
}  // namespace graphtag::testing

int main(int argc, char** argv) {
  using namespace graphtag::testing;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1_gradients},       {"AC2", ac2_oracles}, {"AC3", ac3_decoder},
      {"AC4", ac4_overfit},         {"AC5", ac5_ablation}, {"AC6", ac6_analogy},
      {"AC7", ac7_transformations}, {"AC8", ac8_metrics}, {"AC9", ac9_jackknife}};
  const std::set<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
