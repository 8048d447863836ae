#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphtag/sentence.hpp"

namespace graphtag {

inline constexpr std::size_t kBucketCount = 11;  // 1..10 and 11+

struct AttachmentScores {
  double uas = 0.0;
  double las = 0.0;
  std::size_t scored = 0;  // non-punctuation tokens with a gold head
  std::size_t head_correct = 0;
  std::size_t label_correct = 0;
};

// Tokens whose form is pure punctuation, or whose gold head is absent, are
// skipped. Labels compare after canonical_relation.
AttachmentScores las_uas(const Corpus& pred, const Corpus& gold);

enum class BucketKey { dep_length, root_distance };

struct BucketScore {
  std::size_t pred = 0;     // predicted arcs in the bucket
  std::size_t gold = 0;     // gold arcs in the bucket
  std::size_t pred_hit = 0; // of those predicted, also gold
  std::size_t gold_hit = 0; // of those gold, also predicted
  double precision() const;
  double recall() const;
  double f1() const;
  bool empty() const { return pred == 0 && gold == 0; }
};

// Bucket b (1-based) holds arcs with min(key, 11) == b. Dependency length is
// |i - head| (i itself for the ROOT arc); distance to root is the number of
// arcs between the token and ROOT, 11 when ROOT is unreachable. Precision
// buckets predicted arcs by the predicted tree, recall buckets gold arcs by
// the gold tree. Arcs are (token, head, label) and punctuation is skipped.
std::array<BucketScore, kBucketCount> f1_by_bucket(const Corpus& pred, const Corpus& gold,
                                                   BucketKey key);

// Depth of each token (index 0 unused); unreachable tokens get 0.
std::vector<std::size_t> root_distances(const std::vector<int>& heads);

struct TaggingScores {
  double pos = 0.0;       // predicted-POS column of pred vs gold-POS column of gold
  double supertag = 0.0;  // supertag columns
  // Tokens with head, relation, supertag (and POS when with_pos) all right.
  double all_correct = 0.0;
  std::size_t tokens = 0;
};

TaggingScores tagging_scores(const Corpus& pred, const Corpus& gold, bool with_pos);

struct MetricReport {
  AttachmentScores attachment;
  TaggingScores tagging;
  std::array<BucketScore, kBucketCount> by_length{};
  std::array<BucketScore, kBucketCount> by_depth{};
};

MetricReport evaluate_corpus(const Corpus& pred, const Corpus& gold, bool with_pos = true);

// One "key=value" line per metric.
void write_report_kv(std::ostream& out, const MetricReport& report);
// Header "bucket, pred, gold, precision, recall, f1" (tab-separated), "11+" for the last bucket; empty buckets print "-".
void write_bucket_tsv(std::ostream& out, const std::array<BucketScore, kBucketCount>& buckets);

}  // namespace graphtag
