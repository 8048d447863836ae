#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "graphtag/autograd.hpp"
#include "graphtag/params.hpp"
#include "graphtag/rng.hpp"
#include "graphtag/vocab.hpp"

namespace graphtag {

struct EncoderConfig {
  std::size_t word_dim = 100;
  std::size_t pos_dim = 100;
  std::size_t stag_dim = 100;
  std::size_t char_dim = 30;
  std::size_t char_filters = 30;
  std::size_t char_width = 3;
  std::size_t hidden = 400;
  std::size_t layers = 4;
  bool highway = true;
  // false reproduces the "final concat" wiring: each direction only sees its
  // own direction's states from the layer below.
  bool per_layer_concat = true;
  bool use_chars = true;
  bool use_pos_input = false;
  bool use_stag_input = false;
  double input_dropout = 0.33;
  double layer_dropout = 0.33;
  double recurrent_dropout = 0.33;

  void validate() const;
  std::size_t input_dim() const;
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

// Inverted-dropout masks are drawn from `rng`; a null context means
// inference (dropout is the identity).
struct DropoutContext {
  Rng& rng;
  double input = 0.0;
  double layer = 0.0;
  double recurrent = 0.0;
  double mlp = 0.0;
};

// Entries are 0 or 1/(1-p).
Tensor dropout_mask(const Shape& shape, double p, Rng& rng);
// Applies a fresh mask when ctx is set and p > 0.
Var maybe_dropout(Var x, double p, DropoutContext* ctx);

struct LstmCellParams {
  Parameter* w_i = nullptr;
  Parameter* b_i = nullptr;
  Parameter* w_f = nullptr;
  Parameter* b_f = nullptr;
  Parameter* w_c = nullptr;
  Parameter* b_c = nullptr;
  Parameter* w_o = nullptr;
  Parameter* b_o = nullptr;
  // Highway gate; null when highway connections are off.
  Parameter* w_r = nullptr;
  Parameter* b_r = nullptr;
  Parameter* w_h = nullptr;
};

struct LstmCellVars {
  Var w_i, b_i, w_f, b_f, w_c, b_c, w_o, b_o;
  Var w_r, b_r, w_h;

  static LstmCellVars bind(Tape& tape, const LstmCellParams& p);
  bool highway() const { return w_r.valid(); }
};

struct LstmState {
  Var h;
  Var c;
};

// Gates read [x_t ; h_{t-1}] (both 1 x d rows):
//   i, f, o = sigmoid(W [x;h] + b), c~ = tanh(W_c [x;h] + b_c)
//   c_t = f*c_{t-1} + i*c~,  h_t = o*tanh(c_t)
LstmState lstm_cell(Var x, Var h_prev, Var c_prev, const LstmCellVars& p);
// Same cell state; output becomes r*o*tanh(c_t) + (1-r)*W_h x_t with
// r = sigmoid(W_r [x;h] + b_r).
LstmState highway_cell(Var x, Var h_prev, Var c_prev, const LstmCellVars& p);

struct CharCnnParams {
  Parameter* embedding = nullptr;  // chars x char_dim
  Parameter* filters = nullptr;    // n_filters x (width * char_dim)
  Parameter* bias = nullptr;       // n_filters
  std::size_t width = 3;
};

// Embeds the characters, pads width/2 PAD chars on each side, convolves and
// max-pools over time. Returns a 1 x n_filters row.
Var char_cnn(Tape& tape, std::span<const int> char_ids, const CharCnnParams& p);

struct BiLstmLayerParams {
  LstmCellParams fwd;
  LstmCellParams bwd;
};

struct StackOptions {
  bool highway = true;
  bool per_layer_concat = true;
};

// Runs the layers over 1 x d rows. Each output row is [h^f_t ; h^b_t] of the
// last layer. Recurrent dropout uses one mask per sequence, direction and
// layer; layer dropout applies to each layer's input above the first.
std::vector<Var> bilstm_stack(Tape& tape, std::span<const Var> inputs,
                              std::span<const BiLstmLayerParams> layers, const StackOptions& opts,
                              DropoutContext* dropout);

// Vocabulary ids of one sentence (no ROOT).
struct EncodedSentence {
  std::vector<int> words;
  std::vector<int> pos;
  std::vector<int> stags;
  std::vector<std::vector<int>> chars;

  std::size_t size() const { return words.size(); }
};

// POS input comes from the predicted-POS column, falling back to gold POS.
EncodedSentence encode_ids(const Sentence& s, const Vocabulary& vocab);

class Encoder {
 public:
  Encoder(const EncoderConfig& config, const Vocabulary& vocab, ParamStore& store, Rng& init_rng);

  const EncoderConfig& config() const { return config_; }
  std::size_t input_dim() const { return config_.input_dim(); }
  std::size_t output_dim() const { return 2 * config_.hidden; }

  // One row per token: [word-emb ; pos-emb? ; stag-emb? ; char-cnn?]. With
  // with_root a zero row is prepended for ROOT.
  std::vector<Var> encode_tokens(Tape& tape, const EncodedSentence& s, bool with_root,
                                 DropoutContext* dropout) const;
  // encode_tokens followed by the BiLSTM stack.
  std::vector<Var> run(Tape& tape, const EncodedSentence& s, bool with_root,
                       DropoutContext* dropout) const;

  Parameter& word_embeddings() const { return *word_emb_; }
  const CharCnnParams& char_params() const { return chars_; }
  const std::vector<BiLstmLayerParams>& layers() const { return layers_; }

 private:
  EncoderConfig config_;
  Parameter* word_emb_ = nullptr;
  Parameter* pos_emb_ = nullptr;
  Parameter* stag_emb_ = nullptr;
  CharCnnParams chars_;
  std::vector<BiLstmLayerParams> layers_;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace graphtag
