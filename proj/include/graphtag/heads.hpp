#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "graphtag/autograd.hpp"
#include "graphtag/encoder.hpp"
#include "graphtag/params.hpp"

namespace graphtag {

struct HeadConfig {
  std::size_t arc_dim = 500;
  std::size_t rel_dim = 100;
  std::size_t pos_dim = 500;
  std::size_t stag_dim = 500;
  double mlp_dropout = 0.33;
  // Linear term of the label scorer reads the dependent-role vector of i
  // instead of its head-role vector.
  bool rel_affine_uses_dep = false;
  // Training conditions the label loss on gold heads.
  bool label_on_gold_heads = true;

  void validate() const;
  nlohmann::json to_json() const;
  static HeadConfig from_json(const nlohmann::json& j);
};

// Depth-1 perceptron with ReLU.
struct MlpParams {
  Parameter* w = nullptr;  // out x in
  Parameter* b = nullptr;  // out
};

Var mlp(Tape& tape, Var x, const MlpParams& p);

// dep, head: m x d role matrices, w: d x d, b: d.
// S[i][j] = head_j . (W dep_i + b), the unnormalized score of head j for i.
Var arc_scores(Var dep, Var head, Var w, Var b);

// Label scores for the arcs (deps[k] <- heads[k]), one row per arc:
//   head_p^T U dep_i + W (x_i + head_p) + b
// where x_i is head_i, or dep_i when uses_dep is set.
// u: d x d x r, w: r x d, b: r.
Var label_scores(Var rel_dep, Var rel_head, Var u, Var w, Var b, std::span<const int> deps,
                 std::span<const int> heads, bool uses_dep);

// Probability helpers over plain tensors. Rows of the matrices are tokens,
// row 0 being ROOT.
Tensor arc_distribution(const Tensor& dep, const Tensor& head, const Tensor& w, const Tensor& b,
                        std::size_t i);
Tensor label_distribution(const Tensor& rel_dep, const Tensor& rel_head, const Tensor& u,
                          const Tensor& w, const Tensor& b, std::size_t i, std::size_t p,
                          bool uses_dep);
// softmax(W h + b) for each row h.
Tensor tag_distribution(const Tensor& h, const Tensor& w, const Tensor& b);

struct HeadOutputs {
  Var arc;       // (n+1) x (n+1) unnormalized arc scores, rows = dependents
  Var rel_dep;   // (n+1) x d_rel
  Var rel_head;  // (n+1) x d_rel
  Var pos;       // n x n_pos logits (tokens 1..n when ROOT is present)
  Var stag;      // n x n_stag logits
};

struct HeadSizes {
  std::size_t input = 0;
  std::size_t relations = 0;
  std::size_t pos = 0;
  std::size_t stags = 0;
  bool arcs = false;
};

class ScoringHeads {
 public:
  ScoringHeads(const HeadConfig& config, const HeadSizes& sizes, ParamStore& store,
               Rng& init_rng);

  const HeadConfig& config() const { return config_; }
  const HeadSizes& sizes() const { return sizes_; }

  // `encoded` stacks the encoder rows; with_root means row 0 is ROOT.
  HeadOutputs forward(Tape& tape, Var encoded, bool with_root, DropoutContext* dropout) const;
  Var labels(Tape& tape, const HeadOutputs& out, std::span<const int> deps,
             std::span<const int> heads) const;

 private:
  HeadConfig config_;
  HeadSizes sizes_;
  MlpParams arc_dep_, arc_head_, rel_dep_, rel_head_, pos_mlp_, stag_mlp_;
  Parameter* w_arc_ = nullptr;
  Parameter* b_arc_ = nullptr;
  Parameter* u_rel_ = nullptr;
  Parameter* w_rel_ = nullptr;
  Parameter* b_rel_ = nullptr;
  Parameter* w_pos_ = nullptr;
  Parameter* b_pos_ = nullptr;
  Parameter* w_stag_ = nullptr;
  Parameter* b_stag_ = nullptr;
};

}  // namespace graphtag
