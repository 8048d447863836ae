#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "graphtag/tensor.hpp"

namespace graphtag {

// S[i][j] = log-probability that token i (1..n) attaches to j (0..n, 0 = ROOT).
// Row 0 is unused and the diagonal is -inf.
class ScoreMatrix {
 public:
  explicit ScoreMatrix(std::size_t n);
  // From an (n+1) x (n+1) matrix of raw scores: row-wise log-softmax over all
  // candidates, then the diagonal is masked.
  static ScoreMatrix from_scores(const Tensor& scores);
  // Rows 1..n of `log_probs` are taken as given; the diagonal is masked.
  static ScoreMatrix from_log_probs(const Tensor& log_probs);

  std::size_t n() const { return n_; }
  double& at(std::size_t i, std::size_t j) { return s_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return s_[i * (n_ + 1) + j]; }

 private:
  std::size_t n_;
  std::vector<double> s_;
};

// Head arrays are indexed 0..n with heads[0] = -1.
using Heads = std::vector<int>;

Heads greedy_heads(const ScoreMatrix& s);

// Exactly one token attached to ROOT, no cycles, every token reachable.
bool is_arborescence(std::span<const int> heads);
double tree_score(const ScoreMatrix& s, std::span<const int> heads);

struct Repair {
  enum class Kind { extra_root, cycle };
  Kind kind;
  int node;
  int old_head;
  int new_head;
  double loss;  // S[node][old_head] - S[node][new_head]
  // Smallest loss over every admissible alternative this step considered.
  double best_alternative;
};

struct TreeResult {
  Heads heads;
  std::vector<Repair> repairs;
};

// Two-phase repair of a greedy head array:
//   (a) of several ROOT children keep the one with the highest S[i][0] and
//       re-predict the rest with ROOT masked;
//   (b) while a cycle remains, move the (cycle node, outside head) pair with
//       the smallest score loss. Heads inside the cycle's component are not
//       admissible, and ROOT only is when it has no child.
// Ties go to the smallest node, then the smallest head.
TreeResult enforce_tree(const ScoreMatrix& s, Heads heads);

// Highest-scoring single-rooted arborescence (Chu-Liu/Edmonds per root child).
Heads max_spanning_tree(const ScoreMatrix& s);

// label[i] = argmax of dist row i-1 (ties to the smallest id); label[0] = -1.
std::vector<int> assign_labels(const Tensor& label_dist);

}  // namespace graphtag
