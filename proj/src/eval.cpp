#include "graphtag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <tuple>

#include "graphtag/tensor.hpp"
#include "graphtag/unicode.hpp"
#include "graphtag/vocab.hpp"

namespace graphtag {

namespace {

void check_aligned(const Corpus& pred, const Corpus& gold) {
  if (pred.size() != gold.size()) {
    throw Error("corpora differ in sentence count: " + std::to_string(pred.size()) + " vs " +
                std::to_string(gold.size()));
  }
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != gold[s].size()) {
      throw Error("sentence " + std::to_string(s + 1) + " differs in length: " +
                  std::to_string(pred[s].size()) + " vs " + std::to_string(gold[s].size()));
    }
  }
}

double percent(std::size_t hit, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

using Arc = std::tuple<std::size_t, std::size_t, int, std::string>;

std::size_t bucket_of(BucketKey key, std::size_t i, int head,
                      const std::vector<std::size_t>& depth) {
  std::size_t v;
  if (key == BucketKey::dep_length) {
    v = head == 0 ? i : static_cast<std::size_t>(std::abs(static_cast<int>(i) - head));
  } else {
    v = depth[i] == 0 ? kBucketCount : depth[i];
  }
  return std::min(v, kBucketCount);
}

}  // namespace

AttachmentScores las_uas(const Corpus& pred, const Corpus& gold) {
  check_aligned(pred, gold);
  AttachmentScores s;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    for (std::size_t i = 0; i < gold[k].size(); ++i) {
      const Token& g = gold[k].tokens[i];
      const Token& p = pred[k].tokens[i];
      if (g.head < 0 || is_pure_punctuation(g.form)) continue;
      ++s.scored;
      if (p.head == g.head) {
        ++s.head_correct;
        if (canonical_relation(p.rel) == canonical_relation(g.rel)) ++s.label_correct;
      }
    }
  }
  s.uas = percent(s.head_correct, s.scored);
  s.las = percent(s.label_correct, s.scored);
  return s;
}

double BucketScore::precision() const { return percent(pred_hit, pred); }
double BucketScore::recall() const { return percent(gold_hit, gold); }
double BucketScore::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::vector<std::size_t> root_distances(const std::vector<int>& heads) {
  const std::size_t n = heads.size() - 1;
  std::vector<std::size_t> depth(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t steps = 0;
    int v = static_cast<int>(i);
    while (v > 0 && steps <= n) {
      v = heads[v];
      ++steps;
    }
    depth[i] = v == 0 ? steps : 0;
  }
  return depth;
}

std::array<BucketScore, kBucketCount> f1_by_bucket(const Corpus& pred, const Corpus& gold,
                                                   BucketKey key) {
  check_aligned(pred, gold);
  std::array<BucketScore, kBucketCount> buckets{};
  std::set<Arc> pred_arcs, gold_arcs;
  std::vector<std::pair<Arc, std::size_t>> pred_list, gold_list;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const std::vector<int> ph = heads_of(pred[k]);
    const std::vector<int> gh = heads_of(gold[k]);
    const auto pd = root_distances(ph);
    const auto gd = root_distances(gh);
    for (std::size_t i = 1; i <= gold[k].size(); ++i) {
      const Token& g = gold[k].tokens[i - 1];
      const Token& p = pred[k].tokens[i - 1];
      if (is_pure_punctuation(g.form)) continue;
      if (p.head >= 0) {
        Arc a{k, i, p.head, canonical_relation(p.rel)};
        pred_arcs.insert(a);
        pred_list.emplace_back(a, bucket_of(key, i, p.head, pd));
      }
      if (g.head >= 0) {
        Arc a{k, i, g.head, canonical_relation(g.rel)};
        gold_arcs.insert(a);
        gold_list.emplace_back(a, bucket_of(key, i, g.head, gd));
      }
    }
  }
  for (const auto& [arc, b] : pred_list) {
    ++buckets[b - 1].pred;
    buckets[b - 1].pred_hit += gold_arcs.count(arc);
  }
  for (const auto& [arc, b] : gold_list) {
    ++buckets[b - 1].gold;
    buckets[b - 1].gold_hit += pred_arcs.count(arc);
  }
  return buckets;
}

TaggingScores tagging_scores(const Corpus& pred, const Corpus& gold, bool with_pos) {
  check_aligned(pred, gold);
  TaggingScores s;
  std::size_t pos = 0, stag = 0, all = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    for (std::size_t i = 0; i < gold[k].size(); ++i) {
      const Token& g = gold[k].tokens[i];
      const Token& p = pred[k].tokens[i];
      ++s.tokens;
      const bool pos_ok = p.pred_pos == g.gold_pos;
      const bool stag_ok = p.supertag == g.supertag;
      pos += pos_ok;
      stag += stag_ok;
      all += p.head == g.head && canonical_relation(p.rel) == canonical_relation(g.rel) &&
             stag_ok && (pos_ok || !with_pos);
    }
  }
  s.pos = percent(pos, s.tokens);
  s.supertag = percent(stag, s.tokens);
  s.all_correct = percent(all, s.tokens);
  return s;
}

MetricReport evaluate_corpus(const Corpus& pred, const Corpus& gold, bool with_pos) {
  MetricReport r;
  r.attachment = las_uas(pred, gold);
  r.tagging = tagging_scores(pred, gold, with_pos);
  r.by_length = f1_by_bucket(pred, gold, BucketKey::dep_length);
  r.by_depth = f1_by_bucket(pred, gold, BucketKey::root_distance);
  return r;
}

void write_report_kv(std::ostream& out, const MetricReport& r) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(2);
  out << "uas=" << r.attachment.uas << '\n'
      << "las=" << r.attachment.las << '\n'
      << "scored_tokens=" << r.attachment.scored << '\n'
      << "pos_accuracy=" << r.tagging.pos << '\n'
      << "supertag_accuracy=" << r.tagging.supertag << '\n'
      << "all_correct=" << r.tagging.all_correct << '\n'
      << "tokens=" << r.tagging.tokens << '\n';
  auto buckets = [&](const char* name, const std::array<BucketScore, kBucketCount>& b) {
    for (std::size_t k = 0; k < kBucketCount; ++k) {
      if (b[k].empty()) continue;
      out << name << '_' << (k + 1 == kBucketCount ? "11+" : std::to_string(k + 1))
          << "_f1=" << b[k].f1() << '\n';
    }
  };
  buckets("length", r.by_length);
  buckets("depth", r.by_depth);
  out.flags(flags);
}

void write_bucket_tsv(std::ostream& out, const std::array<BucketScore, kBucketCount>& buckets) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(2) << "bucket\tpred\tgold\tprecision\trecall\tf1\n";
  for (std::size_t k = 0; k < kBucketCount; ++k) {
    const BucketScore& b = buckets[k];
    out << (k + 1 == kBucketCount ? "11+" : std::to_string(k + 1)) << '\t' << b.pred << '\t'
        << b.gold << '\t';
    if (b.empty()) {
      out << "-\t-\t-\n";
    } else {
      out << b.precision() << '\t' << b.recall() << '\t' << b.f1() << '\n';
    }
  }
  out.flags(flags);
}

}  // namespace graphtag
