#include "graphtag/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graphtag/analogy.hpp"
#include "graphtag/config.hpp"
#include "graphtag/corpus_io.hpp"
#include "graphtag/eval.hpp"
#include "graphtag/model.hpp"
#include "graphtag/synthetic.hpp"
#include "graphtag/training.hpp"
#include "graphtag/treeops.hpp"
#include "graphtag/udr.hpp"

namespace graphtag {

namespace {

namespace fs = std::filesystem;

// Writes to a sibling temporary file that replaces the target on commit and
// is removed otherwise. "-" writes to the fallback stream.
class AtomicOutput {
 public:
  AtomicOutput(std::string target, std::ostream& fallback) : target_(std::move(target)) {
    if (target_.empty() || target_ == "-") {
      stream_ = &fallback;
      return;
    }
    tmp_ = target_ + ".tmp";
    file_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error("cannot write " + tmp_);
    stream_ = &file_;
  }
  AtomicOutput(const AtomicOutput&) = delete;
  AtomicOutput& operator=(const AtomicOutput&) = delete;
  ~AtomicOutput() {
    if (!tmp_.empty() && !committed_) {
      file_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return *stream_; }

  void commit() {
    if (tmp_.empty()) {
      stream_->flush();
      return;
    }
    file_.close();
    if (!file_) throw Error("failed writing " + tmp_);
    fs::rename(tmp_, target_);
    committed_ = true;
  }

 private:
  std::string target_;
  std::string tmp_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
  bool committed_ = false;
};

void save_model_atomically(const Model& model, const std::string& path, const nlohmann::json& extra) {
  const std::string tmp = path + ".tmp";
  try {
    model.save(tmp, extra);
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

struct ConfigOptions {
  std::string file;
  std::vector<std::string> sets;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", file, "key = value configuration file");
    cmd->add_option("--set", sets, "override a configuration key (key=value)");
  }
  RunConfig load() const {
    RunConfig rc = file.empty() ? RunConfig{} : RunConfig::read(file);
    for (const auto& s : sets) rc.set_assignment(s);
    return rc;
  }
};

std::string require(const RunConfig& rc, const std::string& key, const std::string& flag) {
  if (auto v = rc.get(key)) return *v;
  throw Error("missing " + flag + " (or '" + key + "' in the configuration)");
}

Model load_model_for(const std::string& path, const RunConfig& rc) {
  if (!fs::exists(path)) throw Error("model file not found: " + path);
  Model model = Model::load(path);
  rc.check_compatible(model.config());
  return model;
}

Model with_decoding(Model model, const RunConfig& rc, bool mst_flag) {
  if (!mst_flag && !rc.has("mst_decoding")) return model;
  ModelConfig c = model.config();
  c.mst_decoding = mst_flag || rc.model_config(c.mode).mst_decoding;
  Model updated(c, model.vocab(), 0);
  updated.params().restore(model.params().snapshot());
  return updated;
}

int cmd_train(const RunConfig& rc, const std::string& jackknife_out, std::ostream& out,
              std::ostream& err) {
  ModelConfig mc = rc.model_config(Mode::joint_pos_stag);
  const TrainConfig tc = rc.train_config();
  Corpus train_set = read_corpus_file(require(rc, "train", "--train"));
  const Corpus dev_set = read_corpus_file(require(rc, "dev", "--dev"));
  if (tc.shuffle_stag) train_set = shuffle_stag_targets(train_set, tc.seed);
  std::optional<PretrainedEmbeddings> pretrained;
  if (auto p = rc.get("pretrained")) pretrained = read_pretrained(*p, mc.encoder.word_dim);

  auto build_model = [&](const Corpus& data, std::uint64_t seed) {
    Vocabulary vocab = Vocabulary::build(data);
    if (pretrained) add_pretrained_words(vocab, *pretrained);
    Model model(mc, std::move(vocab), seed);
    if (pretrained) model.set_pretrained(*pretrained);
    return model;
  };

  if (!jackknife_out.empty()) {
    AtomicOutput output(jackknife_out, out);
    const JackknifeResult jk = jackknife(
        train_set, tc.jackknife_folds, [&](const Corpus& folds, const Corpus& held, std::size_t f) {
          Model model = build_model(folds, tc.seed + f);
          const TrainResult r = train(model, tc, folds, dev_set);
          err << "fold " << f + 1 << "/" << tc.jackknife_folds << ": best epoch " << r.best_epoch
              << '\n';
          return model.annotate(held, tc.threads);
        });
    write_corpus(output.stream(), jk.corpus);
    output.commit();
    return 0;
  }

  const std::string model_path = require(rc, "model", "--model");
  Model model = build_model(train_set, tc.seed);
  std::optional<AtomicOutput> log;
  if (auto l = rc.get("log")) log.emplace(*l, out);
  const nlohmann::json extra = {{"train", *rc.get("train")}, {"seed", tc.seed}};
  const TrainResult result = train(model, tc, train_set, dev_set, [&](const EpochReport& r, const Model& m) {
    if (log) log->stream() << r.to_json().dump() << '\n';
    err << "epoch " << r.epoch << " loss " << r.train_loss << " dev " << r.criterion
        << (r.improved ? " *" : "") << '\n';
    if (r.improved) save_model_atomically(m, model_path, extra);
  });
  save_model_atomically(model, model_path, extra);
  if (log) log->commit();
  out << "best_epoch=" << result.best_epoch << '\n'
      << "best_dev=" << result.history[result.best_epoch - 1].criterion << '\n';
  return 0;
}

int cmd_annotate(const RunConfig& rc, const std::vector<const Model*>& chain, std::ostream& out,
                 std::ostream& err, bool report_throughput) {
  Corpus corpus = read_corpus_file(require(rc, "input", "--input"));
  AtomicOutput output(rc.get("output").value_or("-"), out);
  const std::size_t threads = rc.has("threads") ? rc.train_config().threads : default_thread_count();
  const auto start = std::chrono::steady_clock::now();
  for (const Model* m : chain) corpus = m->annotate(corpus, threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_corpus(output.stream(), corpus);
  output.commit();
  if (report_throughput) {
    err << "parsed " << corpus.size() << " sentences in " << std::fixed << std::setprecision(3)
        << seconds << " s (" << std::setprecision(1)
        << (seconds > 0 ? static_cast<double>(corpus.size()) / seconds : 0.0) << " sentences/s, "
        << threads << " threads)\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                 const std::string& output, const std::string& length_tsv,
                 const std::string& depth_tsv, std::ostream& out) {
  const Corpus gold = read_corpus_file(gold_path);
  const Corpus pred = read_corpus_file(pred_path);
  const MetricReport report = evaluate_corpus(pred, gold);
  AtomicOutput kv(output, out);
  write_report_kv(kv.stream(), report);
  std::optional<AtomicOutput> length, depth;
  if (!length_tsv.empty()) {
    length.emplace(length_tsv, out);
    write_bucket_tsv(length->stream(), report.by_length);
  }
  if (!depth_tsv.empty()) {
    depth.emplace(depth_tsv, out);
    write_bucket_tsv(depth->stream(), report.by_depth);
  }
  kv.commit();
  if (length) length->commit();
  if (depth) depth->commit();
  return 0;
}

int cmd_analogy(const std::string& model_path, const std::string& equations_path,
                const std::string& counts_path, std::size_t top, std::ostream& out,
                std::ostream& err) {
  const Model model = Model::load(model_path);
  const Vocabulary& vocab = model.vocab();
  const Parameter* table = model.params().find("encoder.stag_emb");
  if (!table) table = model.params().find("heads.W_stag");
  if (!table) throw Error("model has neither supertag embeddings nor a supertag classifier");
  std::vector<std::size_t> counts(vocab.stags.size(), 1);
  if (!counts_path.empty()) counts = supertag_counts(read_corpus_file(counts_path), vocab);
  for (int r = 0; r <= SymbolTable::kRoot; ++r) counts[r] = 0;
  const std::vector<int> candidates = most_frequent(counts, top);
  const auto equations = read_equations(equations_path, vocab.stags);
  const AnalogyResult result = analogy_eval(table->value, equations, candidates);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  out << std::fixed << std::setprecision(2) << "equations=" << result.ranks.size() << '\n'
      << "candidates=" << candidates.size() << '\n'
      << "percent_correct=" << result.percent_correct << '\n'
      << "average_rank=" << result.average_rank << '\n';
  return 0;
}

SupertagCatalog load_catalog(const std::string& path) {
  return path.empty() ? SupertagCatalog{} : SupertagCatalog::read(path);
}

int cmd_udr(const std::string& parsed, const std::string& targets, const std::string& trace,
            const std::string& features, const std::string& output, std::ostream& out) {
  const UdrReport report =
      udr_check(read_corpus_file(parsed), read_udr_targets(targets), load_catalog(features));
  AtomicOutput table(output, out);
  write_udr_table(table.stream(), report);
  std::optional<AtomicOutput> trace_out;
  if (!trace.empty()) {
    trace_out.emplace(trace, out);
    for (const auto& [id, text] : report.traces) trace_out->stream() << "# id = " << id << '\n' << text << '\n';
    for (const UdrOutcome& o : report.outcomes) {
      trace_out->stream() << o.target.sentence_id << '\t' << o.target.construction << '\t'
                          << o.target.child << '\t' << o.target.parent << '\t' << o.target.label
                          << "->" << o.tag_label << '\t' << (o.found ? "found" : "missing")
                          << '\n';
    }
  }
  table.commit();
  if (trace_out) trace_out->commit();
  return 0;
}

int cmd_pete(const std::string& premise_path, const std::string& hypothesis_path,
             const std::string& labels_path, bool pete_only, const std::string& features,
             const std::string& output, std::ostream& out) {
  const Corpus premises = read_corpus_file(premise_path);
  const Corpus hypotheses = read_corpus_file(hypothesis_path);
  if (premises.size() != hypotheses.size()) {
    throw Error("premise and hypothesis files hold different numbers of sentences");
  }
  std::map<std::string, bool> gold;
  if (!labels_path.empty()) {
    std::ifstream in(labels_path);
    if (!in) throw Error("cannot open label file " + labels_path);
    std::string id, label;
    while (in >> id >> label) {
      if (label != "YES" && label != "NO") throw Error("labels must be YES or NO, got '" + label + "'");
      gold[id] = label == "YES";
    }
  }
  PeteOptions options;
  options.pete_rules_only = pete_only;
  options.catalog = load_catalog(features);
  AtomicOutput report(output, out);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < premises.size(); ++k) {
    std::string id = premises[k].id();
    if (id.empty()) id = std::to_string(k + 1);
    const PeteResult r = pete_check(DepGraph::from_sentence(premises[k]),
                                    DepGraph::from_sentence(hypotheses[k]), options);
    report.stream() << id << '\t' << (r.entails ? "YES" : "NO") << '\n';
    for (const ArcCheck& c : r.checks) {
      report.stream() << "  (" << c.child << ", " << c.parent << ", " << c.label << ") "
                      << (c.found ? "found" : "missing") << '\n';
    }
    if (!gold.empty()) {
      auto it = gold.find(id);
      if (it == gold.end()) throw Error("no label for pair '" + id + "'");
      tp += r.entails && it->second;
      fp += r.entails && !it->second;
      fn += !r.entails && it->second;
    }
  }
  if (!gold.empty()) {
    const double p = tp + fp == 0 ? 0.0 : 100.0 * tp / (tp + fp);
    const double rc = tp + fn == 0 ? 0.0 : 100.0 * tp / (tp + fn);
    const double f = p + rc == 0 ? 0.0 : 2 * p * rc / (p + rc);
    report.stream() << std::fixed << std::setprecision(1) << "precision=" << p << '\n'
                    << "recall=" << rc << '\n'
                    << "f1=" << f << '\n';
  }
  report.commit();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint supertagger, POS tagger and dependency parser"};
  app.require_subcommand(1);

  ConfigOptions train_cfg, tag_cfg, parse_cfg;
  std::string mode, train_path, dev_path, model_path, log_path, pretrained, jackknife_out;
  std::uint64_t seed = 0;
  bool shuffle_stag = false;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cfg.add_to(train_cmd);
  train_cmd->add_option("--mode", mode, "pos-tagger, supertagger, parser, joint-stag or joint-pos-stag");
  train_cmd->add_option("--train", train_path, "training corpus");
  train_cmd->add_option("--dev", dev_path, "development corpus");
  train_cmd->add_option("--model", model_path, "output checkpoint");
  train_cmd->add_option("--seed", seed, "random seed");
  train_cmd->add_option("--log", log_path, "line-delimited JSON epoch log");
  train_cmd->add_option("--pretrained", pretrained, "pretrained word embeddings");
  train_cmd->add_flag("--shuffle-stag", shuffle_stag, "permute supertags over the training data");
  train_cmd->add_option("--jackknife", jackknife_out,
                        "write k-fold jackknifed predictions for the training corpus instead");

  std::string input, output;
  auto* tag_cmd = app.add_subcommand("tag", "fill predicted tag columns with a tagger model");
  tag_cfg.add_to(tag_cmd);
  tag_cmd->add_option("--model", model_path, "checkpoint");
  tag_cmd->add_option("--input", input, "input corpus");
  tag_cmd->add_option("--output", output, "output corpus (default stdout)");

  std::string pos_model, stag_model;
  bool joint = false, pipeline = false, mst = false;
  auto* parse_cmd = app.add_subcommand("parse", "parse a corpus");
  parse_cfg.add_to(parse_cmd);
  parse_cmd->add_option("--model", model_path, "joint or parser checkpoint");
  parse_cmd->add_option("--input", input, "input corpus");
  parse_cmd->add_option("--output", output, "output corpus (default stdout)");
  auto* joint_flag = parse_cmd->add_flag("--joint", joint, "one joint model fills every column");
  auto* pipe_flag = parse_cmd->add_flag("--pipeline", pipeline, "tagger, supertagger, then parser");
  joint_flag->excludes(pipe_flag);
  parse_cmd->add_option("--pos-model", pos_model, "POS tagger checkpoint for --pipeline");
  parse_cmd->add_option("--stag-model", stag_model, "supertagger checkpoint for --pipeline");
  parse_cmd->add_flag("--mst", mst, "maximum spanning tree decoding");

  std::string gold_path, pred_path, length_tsv, depth_tsv;
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against gold");
  eval_cmd->add_option("--gold", gold_path)->required();
  eval_cmd->add_option("--pred", pred_path)->required();
  eval_cmd->add_option("--output", output, "key=value report (default stdout)");
  eval_cmd->add_option("--length-tsv", length_tsv, "F1 by dependency length");
  eval_cmd->add_option("--depth-tsv", depth_tsv, "F1 by distance to root");

  std::string equations, counts;
  std::size_t top = 300;
  auto* analogy_cmd = app.add_subcommand("analogy", "supertag analogy test");
  analogy_cmd->add_option("--model", model_path)->required();
  analogy_cmd->add_option("--equations", equations, "lines of four supertags a b c d")->required();
  analogy_cmd->add_option("--counts", counts, "corpus used to rank supertags by frequency");
  analogy_cmd->add_option("--top", top, "candidate pool size");

  std::string parsed, targets, trace, features;
  auto* udr_cmd = app.add_subcommand("udr-check", "unbounded dependency recovery check");
  udr_cmd->add_option("--parsed", parsed)->required();
  udr_cmd->add_option("--targets", targets)->required();
  udr_cmd->add_option("--trace", trace, "write rule traces and per-target outcomes");
  udr_cmd->add_option("--supertag-features", features, "supertag feature catalog");
  udr_cmd->add_option("--output", output, "table (default stdout)");

  std::string premise, hypothesis, labels;
  bool pete_only = false;
  auto* pete_cmd = app.add_subcommand("pete-check", "entailment by arc containment");
  pete_cmd->add_option("--premise", premise)->required();
  pete_cmd->add_option("--hypothesis", hypothesis)->required();
  pete_cmd->add_option("--labels", labels, "gold YES/NO per pair id");
  pete_cmd->add_flag("--pete-only", pete_only, "only the relative clause, complement and coordination rules");
  pete_cmd->add_option("--supertag-features", features, "supertag feature catalog");
  pete_cmd->add_option("--output", output, "report (default stdout)");

  std::size_t synth_count = 50;
  std::uint64_t synth_seed = 1;
  auto* synth_cmd = app.add_subcommand("synthetic", "write a generated toy corpus");
  synth_cmd->add_option("--sentences", synth_count, "number of sentences");
  synth_cmd->add_option("--seed", synth_seed, "random seed");
  synth_cmd->add_option("--output", output, "corpus (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    auto flag = [](RunConfig& rc, const std::string& key, const std::string& v) {
      if (!v.empty()) rc.set(key, v);
    };
    if (train_cmd->parsed()) {
      RunConfig rc = train_cfg.load();
      flag(rc, "mode", mode);
      flag(rc, "train", train_path);
      flag(rc, "dev", dev_path);
      flag(rc, "model", model_path);
      flag(rc, "log", log_path);
      flag(rc, "pretrained", pretrained);
      if (train_cmd->count("--seed")) rc.set("seed", std::to_string(seed));
      if (shuffle_stag) rc.set("shuffle_stag", "true");
      return cmd_train(rc, jackknife_out, out, err);
    }
    if (tag_cmd->parsed()) {
      RunConfig rc = tag_cfg.load();
      flag(rc, "model", model_path);
      flag(rc, "input", input);
      flag(rc, "output", output);
      const Model model = load_model_for(require(rc, "model", "--model"), rc);
      return cmd_annotate(rc, {&model}, out, err, false);
    }
    if (parse_cmd->parsed()) {
      RunConfig rc = parse_cfg.load();
      flag(rc, "model", model_path);
      flag(rc, "input", input);
      flag(rc, "output", output);
      Model model = with_decoding(load_model_for(require(rc, "model", "--model"), rc), rc, mst);
      if (!predicts_arcs(model.mode())) {
        throw Error("parse needs a parser or joint model, got a " +
                    std::string(to_string(model.mode())) + " model");
      }
      if (joint && model.mode() == Mode::parser) {
        throw Error("--joint needs a joint model; this checkpoint is a parser");
      }
      if (pipeline && model.mode() != Mode::parser) {
        throw Error("--pipeline needs a parser checkpoint for --model");
      }
      if (!pipeline && (!pos_model.empty() || !stag_model.empty())) {
        throw Error("--pos-model and --stag-model require --pipeline");
      }
      std::vector<std::optional<Model>> stages(2);
      std::vector<const Model*> chain;
      if (!pos_model.empty()) {
        stages[0].emplace(Model::load(pos_model));
        if (stages[0]->mode() != Mode::pos_tagger) throw Error("--pos-model is not a POS tagger");
        chain.push_back(&*stages[0]);
      }
      if (!stag_model.empty()) {
        stages[1].emplace(Model::load(stag_model));
        if (stages[1]->mode() != Mode::supertagger) throw Error("--stag-model is not a supertagger");
        chain.push_back(&*stages[1]);
      }
      chain.push_back(&model);
      return cmd_annotate(rc, chain, out, err, true);
    }
    if (eval_cmd->parsed()) return cmd_evaluate(gold_path, pred_path, output, length_tsv, depth_tsv, out);
    if (analogy_cmd->parsed()) return cmd_analogy(model_path, equations, counts, top, out, err);
    if (udr_cmd->parsed()) return cmd_udr(parsed, targets, trace, features, output, out);
    if (synth_cmd->parsed()) {
      AtomicOutput corpus(output, out);
      write_corpus(corpus.stream(), synthetic_corpus(synth_count, synth_seed));
      corpus.commit();
      return 0;
    }
    if (pete_cmd->parsed()) return cmd_pete(premise, hypothesis, labels, pete_only, features, output, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace graphtag
