#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphtag/decoder.hpp"
#include "graphtag/encoder.hpp"
#include "graphtag/heads.hpp"
#include "graphtag/mode.hpp"
#include "graphtag/params.hpp"
#include "graphtag/vocab.hpp"

namespace graphtag {

struct ModelConfig {
  Mode mode = Mode::joint_pos_stag;
  EncoderConfig encoder;
  HeadConfig heads;
  // Decode with the maximum spanning arborescence instead of greedy + repair.
  bool mst_decoding = false;

  // Published settings per mode: 512 units and dropout 0.5 for the
  // supertagger, 400 units and 0.33 for the parser and joint models.
  static ModelConfig defaults(Mode mode);
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Vocabulary ids of the gold annotation; -1 marks a missing or unknown value.
struct GoldTargets {
  std::vector<int> heads;  // n+1, heads[0] = -1
  std::vector<int> rels;   // n+1, rels[0] = -1
  std::vector<int> pos;    // n
  std::vector<int> stags;  // n
};

GoldTargets gold_targets(const Sentence& s, const Vocabulary& vocab);

struct LossParts {
  double arc = 0.0;
  double rel = 0.0;
  double pos = 0.0;
  double stag = 0.0;
  std::size_t tokens = 0;
};

// Summed cross-entropies of the tasks the mode predicts: heads over all n+1
// candidates, relations given gold (or greedy) heads, POS and supertags over
// tokens 1..n.
Var joint_loss(Tape& tape, const ScoringHeads& heads, const HeadOutputs& out,
               const GoldTargets& gold, Mode mode, LossParts* parts = nullptr);

struct Prediction {
  Heads heads;              // n+1
  std::vector<int> rels;    // n+1, relation ids
  std::vector<int> pos;     // n
  std::vector<int> stags;   // n
  std::vector<Repair> repairs;
};

// Rows of a pretrained embedding file, in file order.
struct PretrainedEmbeddings {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

// One token per line followed by `dim` floats.
PretrainedEmbeddings read_pretrained(const std::filesystem::path& path, std::size_t dim);
// Adds each pretrained word to the word table (count 0).
void add_pretrained_words(Vocabulary& vocab, const PretrainedEmbeddings& emb);

class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  Mode mode() const { return config_.mode; }
  const Vocabulary& vocab() const { return vocab_; }
  ParamStore& params() { return *store_; }
  const ParamStore& params() const { return *store_; }
  const Encoder& encoder() const { return *encoder_; }
  const ScoringHeads& heads() const { return *heads_; }

  HeadOutputs forward(Tape& tape, const EncodedSentence& ids, DropoutContext* dropout) const;
  Var loss(Tape& tape, const EncodedSentence& ids, const GoldTargets& gold,
           DropoutContext* dropout, LossParts* parts = nullptr) const;

  Prediction predict(const Sentence& s) const;
  // Copy of s with the predicted columns filled (POS goes to the predicted
  // POS column).
  Sentence annotate(const Sentence& s) const;
  // Parallel over sentences; output order matches input.
  Corpus annotate(const Corpus& corpus, std::size_t threads = 1) const;

  // Copies vectors of words present in the table; returns how many.
  std::size_t set_pretrained(const PretrainedEmbeddings& emb);

  void save(const std::filesystem::path& path, const nlohmann::json& extra = {}) const;
  static Model load(const std::filesystem::path& path);
  // Metadata stored alongside the weights.
  nlohmann::json metadata(const nlohmann::json& extra = {}) const;

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  std::unique_ptr<ParamStore> store_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<ScoringHeads> heads_;
};

// Thread count from GRAPHTAG_THREADS, else the hardware concurrency.
std::size_t default_thread_count();

}  // namespace graphtag
