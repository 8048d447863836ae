#include "graphtag/model.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace graphtag {

ModelConfig ModelConfig::defaults(Mode mode) {
  ModelConfig c;
  c.mode = mode;
  switch (mode) {
    case Mode::pos_tagger:
      c.encoder.hidden = 200;
      c.encoder.layers = 1;
      c.encoder.highway = false;
      c.encoder.input_dropout = c.encoder.layer_dropout = c.encoder.recurrent_dropout = 0.5;
      c.heads.mlp_dropout = 0.5;
      break;
    case Mode::supertagger:
      c.encoder.hidden = 512;
      c.encoder.use_pos_input = true;
      c.encoder.input_dropout = c.encoder.layer_dropout = c.encoder.recurrent_dropout = 0.5;
      c.heads.mlp_dropout = 0.5;
      break;
    case Mode::parser:
    case Mode::joint_stag:
    case Mode::joint_pos_stag:
      break;
  }
  return c;
}

nlohmann::json ModelConfig::to_json() const {
  return {{"mode", std::string(to_string(mode))},
          {"encoder", encoder.to_json()},
          {"heads", heads.to_json()},
          {"mst_decoding", mst_decoding}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.encoder = EncoderConfig::from_json(j.at("encoder"));
  c.heads = HeadConfig::from_json(j.at("heads"));
  c.mst_decoding = j.at("mst_decoding");
  return c;
}

GoldTargets gold_targets(const Sentence& s, const Vocabulary& vocab) {
  const std::size_t n = s.size();
  GoldTargets g;
  g.heads.assign(n + 1, -1);
  g.rels.assign(n + 1, -1);
  g.pos.assign(n, -1);
  g.stags.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = s.tokens[i];
    g.heads[i + 1] = t.head;
    if (t.head >= 0 && !t.rel.empty()) {
      if (auto id = vocab.rels.find(canonical_relation(t.rel))) g.rels[i + 1] = *id;
    }
    if (auto id = vocab.pos.find(t.gold_pos); id && !t.gold_pos.empty()) g.pos[i] = *id;
    if (auto id = vocab.stags.find(t.supertag); id && !t.supertag.empty()) g.stags[i] = *id;
  }
  return g;
}

namespace {

int argmax_row(const Tensor& t, std::size_t r, std::size_t first) {
  std::size_t best = first;
  for (std::size_t k = first + 1; k < t.cols(); ++k) {
    if (t.at(r, k) > t.at(r, best)) best = k;
  }
  return static_cast<int>(best);
}

}  // namespace

Var joint_loss(Tape& tape, const ScoringHeads& heads, const HeadOutputs& out,
               const GoldTargets& gold, Mode mode, LossParts* parts) {
  const std::size_t n = gold.pos.size();
  if (gold.heads.size() != n + 1 || gold.rels.size() != n + 1 || gold.stags.size() != n) {
    throw Error("joint_loss: gold annotations are misaligned");
  }
  std::vector<Var> terms;
  LossParts local;
  local.tokens = n;
  if (predicts_arcs(mode)) {
    if (out.arc.shape()[0] != n + 1) throw Error("joint_loss: arc scores do not match the sentence");
    Var arc = cross_entropy_with_logits(out.arc, gold.heads);
    local.arc = arc.value().item();
    terms.push_back(arc);

    std::vector<int> deps, hs, targets;
    const Tensor& scores = out.arc.value();
    for (std::size_t i = 1; i <= n; ++i) {
      if (gold.rels[i] < 0) continue;
      int h = gold.heads[i];
      if (!heads.config().label_on_gold_heads) {
        h = -1;
        for (std::size_t j = 0; j <= n; ++j) {
          if (j != i && (h < 0 || scores.at(i, j) > scores.at(i, h))) h = static_cast<int>(j);
        }
      }
      if (h < 0) continue;
      deps.push_back(static_cast<int>(i));
      hs.push_back(h);
      targets.push_back(gold.rels[i]);
    }
    if (!deps.empty()) {
      Var rel = cross_entropy_with_logits(heads.labels(tape, out, deps, hs), targets);
      local.rel = rel.value().item();
      terms.push_back(rel);
    }
  }
  if (predicts_pos(mode)) {
    if (out.pos.shape()[0] != n) throw Error("joint_loss: POS logits do not match the sentence");
    Var pos = cross_entropy_with_logits(out.pos, gold.pos);
    local.pos = pos.value().item();
    terms.push_back(pos);
  }
  if (predicts_stag(mode)) {
    if (out.stag.shape()[0] != n) throw Error("joint_loss: supertag logits do not match the sentence");
    Var stag = cross_entropy_with_logits(out.stag, gold.stags);
    local.stag = stag.value().item();
    terms.push_back(stag);
  }
  if (parts) *parts = local;
  if (terms.empty()) throw Error("joint_loss: mode predicts nothing");
  Var total = terms[0];
  for (std::size_t k = 1; k < terms.size(); ++k) total = add(total, terms[k]);
  return total;
}

PretrainedEmbeddings read_pretrained(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  PretrainedEmbeddings emb;
  emb.dim = dim;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> v;
    v.reserve(dim);
    for (double x; fields >> x;) v.push_back(x);
    if (!fields.eof() || v.size() != dim) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(dim) + " numbers after the token");
    }
    emb.rows.emplace_back(std::move(word), std::move(v));
  }
  return emb;
}

void add_pretrained_words(Vocabulary& vocab, const PretrainedEmbeddings& emb) {
  for (const auto& [word, v] : emb.rows) vocab.words.add(Vocabulary::word_key(word));
  vocab.word_counts.resize(vocab.words.size(), 0);
}

Model::Model(ModelConfig config, Vocabulary vocab, std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)), store_(std::make_unique<ParamStore>()) {
  EncoderConfig& enc = config_.encoder;
  if (config_.mode == Mode::pos_tagger && enc.use_pos_input) {
    throw Error("a POS tagger cannot take POS input");
  }
  if (predicts_stag(config_.mode) && enc.use_stag_input) {
    throw Error("a supertagging model cannot take supertag input");
  }
  if (predicts_pos(config_.mode) && vocab_.pos.size() <= SymbolTable::kRoot + 1) {
    throw Error("training data has no POS tags to predict");
  }
  if (predicts_stag(config_.mode) && vocab_.stags.size() <= SymbolTable::kRoot + 1) {
    throw Error("training data has no supertags to predict");
  }
  Rng rng(seed);
  encoder_ = std::make_unique<Encoder>(enc, vocab_, *store_, rng);
  HeadSizes sizes;
  sizes.input = encoder_->output_dim();
  sizes.arcs = predicts_arcs(config_.mode);
  sizes.relations = sizes.arcs ? vocab_.rels.size() : 0;
  sizes.pos = predicts_pos(config_.mode) ? vocab_.pos.size() : 0;
  sizes.stags = predicts_stag(config_.mode) ? vocab_.stags.size() : 0;
  heads_ = std::make_unique<ScoringHeads>(config_.heads, sizes, *store_, rng);
}

HeadOutputs Model::forward(Tape& tape, const EncodedSentence& ids, DropoutContext* dropout) const {
  const bool root = uses_root(config_.mode);
  std::vector<Var> rows = encoder_->run(tape, ids, root, dropout);
  Var encoded = rows.size() == 1 ? rows[0] : concat(rows, 0);
  return heads_->forward(tape, encoded, root, dropout);
}

Var Model::loss(Tape& tape, const EncodedSentence& ids, const GoldTargets& gold,
                DropoutContext* dropout, LossParts* parts) const {
  if (ids.size() != gold.pos.size()) throw Error("loss: input and gold lengths differ");
  return joint_loss(tape, *heads_, forward(tape, ids, dropout), gold, config_.mode, parts);
}

Prediction Model::predict(const Sentence& s) const {
  Tape tape;
  const EncodedSentence ids = encode_ids(s, vocab_);
  const HeadOutputs out = forward(tape, ids, nullptr);
  const std::size_t n = s.size();
  Prediction p;
  if (predicts_arcs(config_.mode)) {
    const ScoreMatrix scores = ScoreMatrix::from_scores(out.arc.value());
    if (config_.mst_decoding) {
      p.heads = max_spanning_tree(scores);
    } else {
      TreeResult tree = enforce_tree(scores, greedy_heads(scores));
      p.heads = std::move(tree.heads);
      p.repairs = std::move(tree.repairs);
    }
    std::vector<int> deps(n);
    for (std::size_t i = 0; i < n; ++i) deps[i] = static_cast<int>(i + 1);
    Var labels = heads_->labels(tape, out, deps, std::span(p.heads).subspan(1));
    p.rels = assign_labels(softmax_rows(labels.value()));
  }
  // Reserved ids are never targets, so they are skipped at prediction.
  if (predicts_pos(config_.mode)) {
    for (std::size_t i = 0; i < n; ++i) p.pos.push_back(argmax_row(out.pos.value(), i, SymbolTable::kRoot + 1));
  }
  if (predicts_stag(config_.mode)) {
    for (std::size_t i = 0; i < n; ++i) p.stags.push_back(argmax_row(out.stag.value(), i, SymbolTable::kRoot + 1));
  }
  return p;
}

Sentence Model::annotate(const Sentence& s) const {
  const Prediction p = predict(s);
  Sentence out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Token& t = out.tokens[i];
    if (!p.heads.empty()) {
      t.head = p.heads[i + 1];
      t.rel = vocab_.rels.symbol(p.rels[i + 1]);
    }
    if (!p.pos.empty()) t.pred_pos = vocab_.pos.symbol(p.pos[i]);
    if (!p.stags.empty()) t.supertag = vocab_.stags.symbol(p.stags[i]);
  }
  return out;
}

Corpus Model::annotate(const Corpus& corpus, std::size_t threads) const {
  Corpus out(corpus.size());
  threads = std::max<std::size_t>(1, std::min(threads, corpus.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (std::size_t k = next++; k < corpus.size(); k = next++) {
      try {
        out[k] = annotate(corpus[k]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = corpus.size();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::size_t Model::set_pretrained(const PretrainedEmbeddings& emb) {
  Tensor& table = encoder_->word_embeddings().value;
  if (emb.dim != table.cols()) {
    throw Error("pretrained embeddings have " + std::to_string(emb.dim) +
                " dimensions, the model expects " + std::to_string(table.cols()));
  }
  std::size_t copied = 0;
  for (const auto& [word, v] : emb.rows) {
    auto id = vocab_.words.find(Vocabulary::word_key(word));
    if (!id) continue;
    std::copy(v.begin(), v.end(), table.data().begin() + *id * emb.dim);
    ++copied;
  }
  return copied;
}

nlohmann::json Model::metadata(const nlohmann::json& extra) const {
  nlohmann::json meta = {{"format", "graphtag-model"},
                         {"config", config_.to_json()},
                         {"vocab", vocab_.to_json()}};
  if (!extra.is_null()) meta["extra"] = extra;
  return meta;
}

void Model::save(const std::filesystem::path& path, const nlohmann::json& extra) const {
  write_checkpoint(path, make_checkpoint(*store_, metadata(extra).dump()));
}

Model Model::load(const std::filesystem::path& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ckpt.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": corrupt checkpoint metadata: " + e.what());
  }
  if (meta.value("format", "") != "graphtag-model") {
    throw Error(path.string() + " is not a graphtag model checkpoint");
  }
  Model model(ModelConfig::from_json(meta.at("config")), Vocabulary::from_json(meta.at("vocab")), 0);
  load_checkpoint_values(*model.store_, ckpt);
  return model;
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("GRAPHTAG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw Error("GRAPHTAG_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace graphtag
