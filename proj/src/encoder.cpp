#include "graphtag/encoder.hpp"

#include <cmath>
#include <tuple>

#include <nlohmann/json.hpp>

#include "graphtag/mode.hpp"
#include "graphtag/unicode.hpp"

namespace graphtag {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::pos_tagger: return "pos-tagger";
    case Mode::supertagger: return "supertagger";
    case Mode::parser: return "parser";
    case Mode::joint_stag: return "joint-stag";
    case Mode::joint_pos_stag: return "joint-pos-stag";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::pos_tagger, Mode::supertagger, Mode::parser, Mode::joint_stag,
                 Mode::joint_pos_stag}) {
    if (to_string(m) == name) return m;
  }
  throw Error("unknown mode '" + std::string(name) +
              "' (expected pos-tagger, supertagger, parser, joint-stag or joint-pos-stag)");
}

void EncoderConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw Error(std::string("encoder ") + name + " must be positive");
  };
  positive(word_dim, "word_dim");
  positive(hidden, "hidden");
  if (layers < 1) throw Error("encoder needs at least one BiLSTM layer");
  if (use_pos_input) positive(pos_dim, "pos_dim");
  if (use_stag_input) positive(stag_dim, "stag_dim");
  if (use_chars) {
    positive(char_dim, "char_dim");
    positive(char_filters, "char_filters");
    positive(char_width, "char_width");
  }
  for (double p : {input_dropout, layer_dropout, recurrent_dropout}) {
    if (!(p >= 0.0 && p < 1.0)) throw Error("dropout rates must lie in [0, 1)");
  }
}

std::size_t EncoderConfig::input_dim() const {
  return word_dim + (use_pos_input ? pos_dim : 0) + (use_stag_input ? stag_dim : 0) +
         (use_chars ? char_filters : 0);
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"word_dim", word_dim},
          {"pos_dim", pos_dim},
          {"stag_dim", stag_dim},
          {"char_dim", char_dim},
          {"char_filters", char_filters},
          {"char_width", char_width},
          {"hidden", hidden},
          {"layers", layers},
          {"highway", highway},
          {"per_layer_concat", per_layer_concat},
          {"use_chars", use_chars},
          {"use_pos_input", use_pos_input},
          {"use_stag_input", use_stag_input},
          {"input_dropout", input_dropout},
          {"layer_dropout", layer_dropout},
          {"recurrent_dropout", recurrent_dropout}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.word_dim = j.at("word_dim");
  c.pos_dim = j.at("pos_dim");
  c.stag_dim = j.at("stag_dim");
  c.char_dim = j.at("char_dim");
  c.char_filters = j.at("char_filters");
  c.char_width = j.at("char_width");
  c.hidden = j.at("hidden");
  c.layers = j.at("layers");
  c.highway = j.at("highway");
  c.per_layer_concat = j.at("per_layer_concat");
  c.use_chars = j.at("use_chars");
  c.use_pos_input = j.at("use_pos_input");
  c.use_stag_input = j.at("use_stag_input");
  c.input_dropout = j.at("input_dropout");
  c.layer_dropout = j.at("layer_dropout");
  c.recurrent_dropout = j.at("recurrent_dropout");
  return c;
}

Tensor dropout_mask(const Shape& shape, double p, Rng& rng) {
  Tensor mask(shape);
  const double keep = 1.0 / (1.0 - p);
  for (double& v : mask.storage()) v = rng.bernoulli(p) ? 0.0 : keep;
  return mask;
}

Var maybe_dropout(Var x, double p, DropoutContext* ctx) {
  if (ctx == nullptr || p <= 0.0) return x;
  return dropout(x, dropout_mask(x.shape(), p, ctx->rng));
}

LstmCellVars LstmCellVars::bind(Tape& tape, const LstmCellParams& p) {
  LstmCellVars v;
  v.w_i = tape.param(*p.w_i);
  v.b_i = tape.param(*p.b_i);
  v.w_f = tape.param(*p.w_f);
  v.b_f = tape.param(*p.b_f);
  v.w_c = tape.param(*p.w_c);
  v.b_c = tape.param(*p.b_c);
  v.w_o = tape.param(*p.w_o);
  v.b_o = tape.param(*p.b_o);
  if (p.w_r) {
    v.w_r = tape.param(*p.w_r);
    v.b_r = tape.param(*p.b_r);
    v.w_h = tape.param(*p.w_h);
  }
  return v;
}

namespace {

struct Gates {
  Var o;
  Var c;
};

Gates lstm_gates(Var xh, Var c_prev, const LstmCellVars& p) {
  Var i = sigmoid(linear(xh, p.w_i, p.b_i));
  Var f = sigmoid(linear(xh, p.w_f, p.b_f));
  Var candidate = tanh(linear(xh, p.w_c, p.b_c));
  Var o = sigmoid(linear(xh, p.w_o, p.b_o));
  Var c = add(mul(f, c_prev), mul(i, candidate));
  return {o, c};
}

}  // namespace

LstmState lstm_cell(Var x, Var h_prev, Var c_prev, const LstmCellVars& p) {
  Var xh = concat({x, h_prev}, 1);
  auto [o, c] = lstm_gates(xh, c_prev, p);
  return {mul(o, tanh(c)), c};
}

LstmState highway_cell(Var x, Var h_prev, Var c_prev, const LstmCellVars& p) {
  if (!p.highway()) throw Error("highway_cell: parameters lack the highway gate");
  Var xh = concat({x, h_prev}, 1);
  auto [o, c] = lstm_gates(xh, c_prev, p);
  Var r = sigmoid(linear(xh, p.w_r, p.b_r));
  Var carried = mul(mul(r, o), tanh(c));
  Var skipped = mul(affine(r, -1.0, 1.0), linear(x, p.w_h));
  return {add(carried, skipped), c};
}

Var char_cnn(Tape& tape, std::span<const int> char_ids, const CharCnnParams& p) {
  if (char_ids.empty()) throw Error("char_cnn: empty word");
  const std::size_t pad = p.width / 2;
  std::vector<int> padded(pad, SymbolTable::kPad);
  padded.insert(padded.end(), char_ids.begin(), char_ids.end());
  padded.insert(padded.end(), pad, SymbolTable::kPad);
  Var emb = embedding_lookup(tape.param(*p.embedding), padded);
  Var conv = conv1d(emb, tape.param(*p.filters), tape.param(*p.bias), p.width);
  return max_over_axis(conv, 0);
}

std::vector<Var> bilstm_stack(Tape& tape, std::span<const Var> inputs,
                              std::span<const BiLstmLayerParams> layers, const StackOptions& opts,
                              DropoutContext* dropout) {
  if (layers.empty()) throw Error("bilstm_stack: at least one layer is required");
  if (inputs.empty()) throw Error("bilstm_stack: empty input sequence");
  const std::size_t steps = inputs.size();

  auto run_direction = [&](const LstmCellParams& params, const std::vector<Var>& xs,
                           bool reverse) {
    const LstmCellVars cell = LstmCellVars::bind(tape, params);
    const std::size_t hidden = params.b_i->value.size();
    Var h = tape.constant(Tensor(Shape{1, hidden}));
    Var c = tape.constant(Tensor(Shape{1, hidden}));
    const bool recurrent = dropout != nullptr && dropout->recurrent > 0.0;
    Tensor mask;
    if (recurrent) mask = dropout_mask(Shape{1, hidden}, dropout->recurrent, dropout->rng);
    std::vector<Var> out(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t t = reverse ? steps - 1 - k : k;
      Var h_in = recurrent ? graphtag::dropout(h, mask) : h;
      LstmState s = opts.highway ? highway_cell(xs[t], h_in, c, cell) : lstm_cell(xs[t], h_in, c, cell);
      h = s.h;
      c = s.c;
      out[t] = h;
    }
    return out;
  };

  std::vector<Var> fwd_in(inputs.begin(), inputs.end());
  std::vector<Var> bwd_in = fwd_in;
  std::vector<Var> fwd_out, bwd_out;
  const double layer_p = dropout ? dropout->layer : 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l > 0) {
      if (opts.per_layer_concat) {
        for (std::size_t t = 0; t < steps; ++t) {
          fwd_in[t] = maybe_dropout(concat({fwd_out[t], bwd_out[t]}, 1), layer_p, dropout);
        }
        bwd_in = fwd_in;
      } else {
        for (std::size_t t = 0; t < steps; ++t) {
          fwd_in[t] = maybe_dropout(fwd_out[t], layer_p, dropout);
          bwd_in[t] = maybe_dropout(bwd_out[t], layer_p, dropout);
        }
      }
    }
    fwd_out = run_direction(layers[l].fwd, fwd_in, false);
    bwd_out = run_direction(layers[l].bwd, bwd_in, true);
  }
  std::vector<Var> out(steps);
  for (std::size_t t = 0; t < steps; ++t) out[t] = concat({fwd_out[t], bwd_out[t]}, 1);
  return out;
}

EncodedSentence encode_ids(const Sentence& s, const Vocabulary& vocab) {
  EncodedSentence e;
  for (const Token& t : s.tokens) {
    e.words.push_back(vocab.words.lookup(Vocabulary::word_key(t.form)));
    const std::string& pos = t.pred_pos.empty() ? t.gold_pos : t.pred_pos;
    e.pos.push_back(pos.empty() ? SymbolTable::kUnk : vocab.pos.lookup(pos));
    e.stags.push_back(t.supertag.empty() ? SymbolTable::kUnk : vocab.stags.lookup(t.supertag));
    std::vector<int> chars;
    for (const std::string& c : utf8_chars(t.form)) chars.push_back(vocab.chars.lookup(c));
    e.chars.push_back(std::move(chars));
  }
  return e;
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(Shape{rows, cols});
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : t.storage()) v = rng.uniform(-limit, limit);
  return t;
}

namespace {

Tensor embedding_init(std::size_t rows, std::size_t dim, Rng& rng) {
  Tensor t(Shape{rows, dim});
  const double limit = std::sqrt(3.0 / static_cast<double>(dim));
  for (double& v : t.storage()) v = rng.uniform(-limit, limit);
  return t;
}

LstmCellParams make_cell(ParamStore& store, const std::string& prefix, std::size_t in,
                         std::size_t hidden, bool highway, Rng& rng) {
  LstmCellParams p;
  auto gate = [&](const char* w, const char* b, double bias) -> std::pair<Parameter*, Parameter*> {
    Parameter& wp = store.add(prefix + "." + w, glorot_uniform(hidden, in + hidden, rng));
    Parameter& bp = store.add(prefix + "." + b, Tensor(Shape{hidden}, bias));
    return {&wp, &bp};
  };
  std::tie(p.w_i, p.b_i) = gate("W_i", "b_i", 0.0);
  std::tie(p.w_f, p.b_f) = gate("W_f", "b_f", 1.0);
  std::tie(p.w_c, p.b_c) = gate("W_c", "b_c", 0.0);
  std::tie(p.w_o, p.b_o) = gate("W_o", "b_o", 0.0);
  if (highway) {
    std::tie(p.w_r, p.b_r) = gate("W_r", "b_r", 0.0);
    p.w_h = &store.add(prefix + ".W_h", glorot_uniform(hidden, in, rng));
  }
  return p;
}

}  // namespace

Encoder::Encoder(const EncoderConfig& config, const Vocabulary& vocab, ParamStore& store,
                 Rng& init_rng)
    : config_(config) {
  config_.validate();
  // Word rows start at zero; pretrained vectors are copied in afterwards.
  word_emb_ = &store.add("encoder.word_emb", Tensor(Shape{vocab.words.size(), config_.word_dim}));
  if (config_.use_pos_input) {
    pos_emb_ = &store.add("encoder.pos_emb", embedding_init(vocab.pos.size(), config_.pos_dim, init_rng));
  }
  if (config_.use_stag_input) {
    stag_emb_ =
        &store.add("encoder.stag_emb", embedding_init(vocab.stags.size(), config_.stag_dim, init_rng));
  }
  if (config_.use_chars) {
    chars_.width = config_.char_width;
    chars_.embedding =
        &store.add("encoder.char_emb", embedding_init(vocab.chars.size(), config_.char_dim, init_rng));
    chars_.filters = &store.add(
        "encoder.char_filters",
        glorot_uniform(config_.char_filters, config_.char_width * config_.char_dim, init_rng));
    chars_.bias = &store.add("encoder.char_bias", Tensor(Shape{config_.char_filters}));
  }
  std::size_t in = config_.input_dim();
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string prefix = "encoder.layer" + std::to_string(l);
    BiLstmLayerParams layer;
    layer.fwd = make_cell(store, prefix + ".fwd", in, config_.hidden, config_.highway, init_rng);
    layer.bwd = make_cell(store, prefix + ".bwd", in, config_.hidden, config_.highway, init_rng);
    layers_.push_back(layer);
    in = config_.per_layer_concat ? 2 * config_.hidden : config_.hidden;
  }
}

std::vector<Var> Encoder::encode_tokens(Tape& tape, const EncodedSentence& s, bool with_root,
                                        DropoutContext* dropout) const {
  if (s.size() == 0) throw Error("encode_tokens: empty sentence");
  std::vector<Var> columns;
  columns.push_back(embedding_lookup(tape.param(*word_emb_), s.words));
  if (config_.use_pos_input) columns.push_back(embedding_lookup(tape.param(*pos_emb_), s.pos));
  if (config_.use_stag_input) columns.push_back(embedding_lookup(tape.param(*stag_emb_), s.stags));
  if (config_.use_chars) {
    std::vector<Var> rows;
    rows.reserve(s.size());
    for (const auto& word : s.chars) rows.push_back(char_cnn(tape, word, chars_));
    columns.push_back(rows.size() == 1 ? rows[0] : concat(rows, 0));
  }
  Var matrix = columns.size() == 1 ? columns[0] : concat(columns, 1);
  if (with_root) {
    matrix = concat({tape.constant(Tensor(Shape{1, input_dim()})), matrix}, 0);
  }
  matrix = maybe_dropout(matrix, dropout ? dropout->input : 0.0, dropout);
  const std::size_t n = matrix.shape()[0];
  std::vector<Var> rows;
  rows.reserve(n);
  for (std::size_t t = 0; t < n; ++t) rows.push_back(slice(matrix, 0, t, t + 1));
  return rows;
}

std::vector<Var> Encoder::run(Tape& tape, const EncodedSentence& s, bool with_root,
                              DropoutContext* dropout) const {
  const std::vector<Var> inputs = encode_tokens(tape, s, with_root, dropout);
  return bilstm_stack(tape, inputs, layers_, {config_.highway, config_.per_layer_concat}, dropout);
}

}  // namespace graphtag
