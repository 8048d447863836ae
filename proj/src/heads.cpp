#include "graphtag/heads.hpp"

#include <string>

#include <nlohmann/json.hpp>

namespace graphtag {

void HeadConfig::validate() const {
  if (arc_dim == 0 || rel_dim == 0 || pos_dim == 0 || stag_dim == 0) {
    throw Error("head MLP widths must be positive");
  }
  if (!(mlp_dropout >= 0.0 && mlp_dropout < 1.0)) throw Error("mlp_dropout must lie in [0, 1)");
}

nlohmann::json HeadConfig::to_json() const {
  return {{"arc_dim", arc_dim},
          {"rel_dim", rel_dim},
          {"pos_dim", pos_dim},
          {"stag_dim", stag_dim},
          {"mlp_dropout", mlp_dropout},
          {"rel_affine_uses_dep", rel_affine_uses_dep},
          {"label_on_gold_heads", label_on_gold_heads}};
}

HeadConfig HeadConfig::from_json(const nlohmann::json& j) {
  HeadConfig c;
  c.arc_dim = j.at("arc_dim");
  c.rel_dim = j.at("rel_dim");
  c.pos_dim = j.at("pos_dim");
  c.stag_dim = j.at("stag_dim");
  c.mlp_dropout = j.at("mlp_dropout");
  c.rel_affine_uses_dep = j.at("rel_affine_uses_dep");
  c.label_on_gold_heads = j.at("label_on_gold_heads");
  return c;
}

Var mlp(Tape& tape, Var x, const MlpParams& p) {
  return relu(linear(x, tape.param(*p.w), tape.param(*p.b)));
}

Var arc_scores(Var dep, Var head, Var w, Var b) {
  return matmul(linear(dep, w, b), transpose(head));
}

Var label_scores(Var rel_dep, Var rel_head, Var u, Var w, Var b, std::span<const int> deps,
                 std::span<const int> heads, bool uses_dep) {
  if (deps.size() != heads.size()) throw Error("label_scores: deps and heads differ in length");
  const auto n = static_cast<int>(rel_dep.shape()[0]);
  for (std::size_t k = 0; k < deps.size(); ++k) {
    if (deps[k] < 0 || deps[k] >= n) {
      throw Error("label_scores: dependent " + std::to_string(deps[k]) + " out of range");
    }
    if (heads[k] < 0 || heads[k] >= n) {
      throw Error("label_scores: head " + std::to_string(heads[k]) + " out of range 0.." +
                  std::to_string(n - 1));
    }
  }
  Var dep_rows = embedding_lookup(rel_dep, deps);
  Var head_rows = embedding_lookup(rel_head, heads);
  Var own = uses_dep ? dep_rows : embedding_lookup(rel_head, deps);
  return add(bilinear(head_rows, u, dep_rows), linear(add(own, head_rows), w, b));
}

Tensor arc_distribution(const Tensor& dep, const Tensor& head, const Tensor& w, const Tensor& b,
                        std::size_t i) {
  if (i == 0) throw Error("arc_distribution: ROOT takes no head");
  if (i >= dep.rows()) throw Error("arc_distribution: token index out of range");
  Tape tape;
  Var d = slice(tape.constant(dep), 0, i, i + 1);
  Var s = arc_scores(d, tape.constant(head), tape.constant(w), tape.constant(b));
  return softmax_rows(s.value()).reshaped({head.rows()});
}

Tensor label_distribution(const Tensor& rel_dep, const Tensor& rel_head, const Tensor& u,
                          const Tensor& w, const Tensor& b, std::size_t i, std::size_t p,
                          bool uses_dep) {
  Tape tape;
  const int dep = static_cast<int>(i), hd = static_cast<int>(p);
  Var s = label_scores(tape.constant(rel_dep), tape.constant(rel_head), tape.constant(u),
                       tape.constant(w), tape.constant(b), std::span(&dep, 1), std::span(&hd, 1),
                       uses_dep);
  return softmax_rows(s.value()).reshaped({u.shape()[2]});
}

Tensor tag_distribution(const Tensor& h, const Tensor& w, const Tensor& b) {
  Tape tape;
  return softmax_rows(linear(tape.constant(h), tape.constant(w), tape.constant(b)).value());
}

namespace {

MlpParams make_mlp(ParamStore& store, const std::string& name, std::size_t in, std::size_t out,
                   Rng& rng) {
  return {&store.add(name + ".W", glorot_uniform(out, in, rng)),
          &store.add(name + ".b", Tensor(Shape{out}))};
}

}  // namespace

ScoringHeads::ScoringHeads(const HeadConfig& config, const HeadSizes& sizes, ParamStore& store,
                           Rng& init_rng)
    : config_(config), sizes_(sizes) {
  config_.validate();
  const std::size_t in = sizes_.input;
  if (sizes_.arcs) {
    if (sizes_.relations == 0) throw Error("parser heads need a relation inventory");
    const std::size_t da = config_.arc_dim, dr = config_.rel_dim, r = sizes_.relations;
    arc_dep_ = make_mlp(store, "heads.arc_dep", in, da, init_rng);
    arc_head_ = make_mlp(store, "heads.arc_head", in, da, init_rng);
    rel_dep_ = make_mlp(store, "heads.rel_dep", in, dr, init_rng);
    rel_head_ = make_mlp(store, "heads.rel_head", in, dr, init_rng);
    w_arc_ = &store.add("heads.W_arc", glorot_uniform(da, da, init_rng));
    b_arc_ = &store.add("heads.b_arc", Tensor(Shape{da}));
    Tensor u = glorot_uniform(dr, dr * r, init_rng).reshaped({dr, dr, r});
    u_rel_ = &store.add("heads.U_rel", std::move(u));
    w_rel_ = &store.add("heads.W_rel", glorot_uniform(r, dr, init_rng));
    b_rel_ = &store.add("heads.b_rel", Tensor(Shape{r}));
  }
  if (sizes_.pos > 0) {
    pos_mlp_ = make_mlp(store, "heads.pos_mlp", in, config_.pos_dim, init_rng);
    w_pos_ = &store.add("heads.W_pos", glorot_uniform(sizes_.pos, config_.pos_dim, init_rng));
    b_pos_ = &store.add("heads.b_pos", Tensor(Shape{sizes_.pos}));
  }
  if (sizes_.stags > 0) {
    stag_mlp_ = make_mlp(store, "heads.stag_mlp", in, config_.stag_dim, init_rng);
    w_stag_ = &store.add("heads.W_stag", glorot_uniform(sizes_.stags, config_.stag_dim, init_rng));
    b_stag_ = &store.add("heads.b_stag", Tensor(Shape{sizes_.stags}));
  }
}

HeadOutputs ScoringHeads::forward(Tape& tape, Var encoded, bool with_root,
                                  DropoutContext* dropout) const {
  const double p = dropout ? config_.mlp_dropout : 0.0;
  auto input = [&]() { return maybe_dropout(encoded, p, dropout); };
  HeadOutputs out;
  if (sizes_.arcs) {
    if (!with_root) throw Error("arc scoring requires a ROOT row");
    Var dep = mlp(tape, input(), arc_dep_);
    Var head = mlp(tape, input(), arc_head_);
    out.arc = arc_scores(dep, head, tape.param(*w_arc_), tape.param(*b_arc_));
    out.rel_dep = mlp(tape, input(), rel_dep_);
    out.rel_head = mlp(tape, input(), rel_head_);
  }
  const std::size_t rows = encoded.shape()[0];
  const std::size_t first = with_root ? 1 : 0;
  if (first >= rows) throw Error("scoring heads: no tokens to tag");
  auto tokens = [&]() {
    Var x = input();
    return first == 0 ? x : slice(x, 0, first, rows);
  };
  if (sizes_.pos > 0) {
    out.pos = linear(mlp(tape, tokens(), pos_mlp_), tape.param(*w_pos_), tape.param(*b_pos_));
  }
  if (sizes_.stags > 0) {
    out.stag =
        linear(mlp(tape, tokens(), stag_mlp_), tape.param(*w_stag_), tape.param(*b_stag_));
  }
  return out;
}

Var ScoringHeads::labels(Tape& tape, const HeadOutputs& out, std::span<const int> deps,
                         std::span<const int> heads) const {
  if (!sizes_.arcs) throw Error("model has no relation scorer");
  return label_scores(out.rel_dep, out.rel_head, tape.param(*u_rel_), tape.param(*w_rel_),
                      tape.param(*b_rel_), deps, heads, config_.rel_affine_uses_dep);
}

}  // namespace graphtag
