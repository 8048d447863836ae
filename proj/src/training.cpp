#include "graphtag/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace graphtag {

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error("batch size must be at least 1");
  if (patience < 1) throw Error("patience must be at least 1");
  if (max_epochs < 1) throw Error("max_epochs must be at least 1");
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (jackknife_folds < 2) throw Error("jackknife needs at least 2 folds");
  if (!(unk_replace >= 0.0 && unk_replace <= 1.0)) throw Error("unk_replace must lie in [0, 1]");
}

nlohmann::json EpochReport::to_json() const {
  return {{"epoch", epoch},
          {"train_loss", train_loss},
          {"pos_accuracy", pos_accuracy},
          {"supertag_accuracy", supertag_accuracy},
          {"uas", uas},
          {"las", las},
          {"all_correct", all_correct},
          {"criterion", criterion},
          {"improved", improved},
          {"seconds", seconds}};
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience < 1) throw Error("patience must be at least 1");
}

bool EarlyStopping::update(double value) {
  ++epochs_;
  if (epochs_ == 1 || value > best_) {
    best_ = value;
    best_epoch_ = epochs_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

double dev_criterion(Mode mode, const MetricReport& r) {
  switch (mode) {
    case Mode::pos_tagger: return r.tagging.pos;
    case Mode::supertagger: return r.tagging.supertag;
    case Mode::parser: return r.attachment.las;
    case Mode::joint_stag:
    case Mode::joint_pos_stag: return r.tagging.all_correct;
  }
  return 0.0;
}

MetricReport evaluate_model(const Model& model, const Corpus& dev, std::size_t threads) {
  return evaluate_corpus(model.annotate(dev, threads), dev, predicts_pos(model.mode()));
}

namespace {

struct Prepared {
  EncodedSentence ids;
  GoldTargets gold;
};

std::vector<Prepared> prepare(const Model& model, const Corpus& corpus) {
  std::vector<Prepared> out;
  out.reserve(corpus.size());
  for (const Sentence& s : corpus) {
    if (s.empty()) continue;
    out.push_back({encode_ids(s, model.vocab()), gold_targets(s, model.vocab())});
  }
  return out;
}

void replace_singletons(EncodedSentence& ids, const Vocabulary& vocab, double p, Rng& rng) {
  if (p <= 0.0) return;
  for (int& w : ids.words) {
    if (static_cast<std::size_t>(w) < vocab.word_counts.size() && vocab.word_counts[w] == 1 &&
        rng.bernoulli(p)) {
      w = SymbolTable::kUnk;
    }
  }
}

}  // namespace

double corpus_loss(const Model& model, const Corpus& corpus) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const Prepared& p : prepare(model, corpus)) {
    Tape tape;
    total += model.loss(tape, p.ids, p.gold, nullptr).value().item();
    tokens += p.ids.size();
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

TrainResult train(Model& model, const TrainConfig& config, const Corpus& train_set,
                  const Corpus& dev_set, const EpochCallback& on_epoch) {
  config.validate();
  const std::vector<Prepared> data = prepare(model, train_set);
  if (data.empty()) throw Error("training corpus is empty");
  if (dev_set.empty()) throw Error("development corpus is empty");

  Rng rng(config.seed);
  AdamState adam;
  adam.config.learning_rate = config.learning_rate;
  const EncoderConfig& enc = model.config().encoder;
  DropoutContext dropout{rng, enc.input_dropout, enc.layer_dropout, enc.recurrent_dropout,
                         model.config().heads.mlp_dropout};
  DropoutContext* drop = config.dropout ? &dropout : nullptr;
  const std::vector<Parameter*> params = model.params().all();

  TrainResult result;
  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best = model.params().snapshot();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      std::size_t tokens = 0;
      for (std::size_t k = b; k < e; ++k) tokens += data[order[k]].ids.size();
      model.params().zero_grad();
      for (std::size_t k = b; k < e; ++k) {
        const Prepared& p = data[order[k]];
        EncodedSentence ids = p.ids;
        replace_singletons(ids, model.vocab(), config.unk_replace, rng);
        Tape tape;
        Var loss = model.loss(tape, ids, p.gold, drop);
        loss_sum += loss.value().item();
        tape.backward(scale(loss, 1.0 / static_cast<double>(tokens)));
      }
      token_sum += tokens;
      adam_step(params, adam);
    }

    const MetricReport report = evaluate_model(model, dev_set, config.threads);
    EpochReport er;
    er.epoch = epoch;
    er.train_loss = loss_sum / static_cast<double>(token_sum);
    er.pos_accuracy = report.tagging.pos;
    er.supertag_accuracy = report.tagging.supertag;
    er.uas = report.attachment.uas;
    er.las = report.attachment.las;
    er.all_correct = report.tagging.all_correct;
    er.criterion = dev_criterion(model.mode(), report);
    er.improved = stopper.update(er.criterion);
    er.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (er.improved) best = model.params().snapshot();
    result.history.push_back(er);
    if (on_epoch) on_epoch(er, model);
    if (stopper.should_stop()) break;
  }
  model.params().restore(best);
  result.best_epoch = stopper.best_epoch();
  return result;
}

JackknifeResult jackknife(const Corpus& corpus, std::size_t k, const FoldTrainer& trainer) {
  if (k < 2) throw Error("jackknife needs at least 2 folds");
  const std::size_t n = corpus.size();
  if (n < k) {
    throw Error("jackknife with " + std::to_string(k) + " folds needs at least " +
                std::to_string(k) + " sentences, got " + std::to_string(n));
  }
  JackknifeResult result;
  result.corpus.resize(n);
  result.fold_of.assign(n, 0);
  result.trained_on.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * n / k, hi = (f + 1) * n / k;
    Corpus train_folds, held_out;
    for (std::size_t s = 0; s < n; ++s) {
      if (s >= lo && s < hi) {
        held_out.push_back(corpus[s]);
      } else {
        train_folds.push_back(corpus[s]);
        result.trained_on[f].push_back(s);
      }
    }
    Corpus predicted = trainer(train_folds, held_out, f);
    if (predicted.size() != held_out.size()) {
      throw Error("jackknife fold " + std::to_string(f) + " returned the wrong sentence count");
    }
    for (std::size_t s = lo; s < hi; ++s) {
      Sentence out = std::move(predicted[s - lo]);
      out.comments.push_back("# jackknife = " + std::to_string(f + 1) + "/" + std::to_string(k));
      result.corpus[s] = std::move(out);
      result.fold_of[s] = f;
    }
  }
  return result;
}

Corpus shuffle_stag_targets(const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::string> tags;
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) tags.push_back(t.supertag);
  }
  Rng rng(seed);
  rng.shuffle(tags);
  Corpus out = corpus;
  std::size_t k = 0;
  for (Sentence& s : out) {
    for (Token& t : s.tokens) t.supertag = tags[k++];
  }
  return out;
}

}  // namespace graphtag
