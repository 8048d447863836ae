#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "graphtag/adam.hpp"
#include "graphtag/eval.hpp"
#include "graphtag/model.hpp"

namespace graphtag {

struct TrainConfig {
  std::size_t batch_size = 100;
  double learning_rate = 0.01;
  std::size_t patience = 5;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 1;
  std::size_t jackknife_folds = 10;
  bool shuffle_stag = false;
  // Probability of replacing a word seen once in training by UNK.
  double unk_replace = 0.1;
  bool dropout = true;
  std::size_t threads = 1;  // dev-set decoding

  void validate() const;
};

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean per token
  double pos_accuracy = 0.0;
  double supertag_accuracy = 0.0;
  double uas = 0.0;
  double las = 0.0;
  double all_correct = 0.0;
  double criterion = 0.0;  // the mode's early-stopping metric
  bool improved = false;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

// Stops after `patience` consecutive epochs without a strictly better value.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  // Returns true when the value is a new best.
  bool update(double value);
  bool should_stop() const { return stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }
  std::size_t epochs() const { return epochs_; }

 private:
  std::size_t patience_;
  std::size_t epochs_ = 0;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
};

// Supertag accuracy, POS accuracy, LAS, or the all-correct percentage,
// depending on the mode.
double dev_criterion(Mode mode, const MetricReport& report);
MetricReport evaluate_model(const Model& model, const Corpus& dev, std::size_t threads = 1);

struct TrainResult {
  std::vector<EpochReport> history;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochReport&, const Model&)>;

// Trains in place and leaves the model at its best dev epoch.
TrainResult train(Model& model, const TrainConfig& config, const Corpus& train_set,
                  const Corpus& dev_set, const EpochCallback& on_epoch = {});

// Mean per-token loss without dropout.
double corpus_loss(const Model& model, const Corpus& corpus);

// Annotates held-out sentences with a model trained on the other folds.
using FoldTrainer = std::function<Corpus(const Corpus& train_folds, const Corpus& held_out,
                                         std::size_t fold)>;

struct JackknifeResult {
  Corpus corpus;
  std::vector<std::size_t> fold_of;                    // per sentence
  std::vector<std::vector<std::size_t>> trained_on;   // per fold, sentence indices
};

// Contiguous folds: fold f holds sentences [f*N/k, (f+1)*N/k). Output keeps
// the input order and carries a "# jackknife = f/k" comment (f is 1-based).
JackknifeResult jackknife(const Corpus& corpus, std::size_t k, const FoldTrainer& trainer);

// Seeded permutation of the supertag column over the whole corpus.
Corpus shuffle_stag_targets(const Corpus& corpus, std::uint64_t seed);

}  // namespace graphtag
