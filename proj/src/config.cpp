#include "graphtag/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <set>

namespace graphtag {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || x < 0) throw Error("config key '" + key + "' needs a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw Error("config key '" + key + "' needs a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("config key '" + key + "' needs true or false, got '" + v + "'");
}

using ModelSetter = std::function<void(ModelConfig&, const std::string& key, const std::string& v)>;

const std::map<std::string, ModelSetter>& model_setters() {
  static const std::map<std::string, ModelSetter> setters = {
      {"word_dim", [](ModelConfig& c, auto& k, auto& v) { c.encoder.word_dim = to_size(k, v); }},
      {"pos_dim", [](ModelConfig& c, auto& k, auto& v) { c.encoder.pos_dim = to_size(k, v); }},
      {"stag_dim", [](ModelConfig& c, auto& k, auto& v) { c.encoder.stag_dim = to_size(k, v); }},
      {"char_dim", [](ModelConfig& c, auto& k, auto& v) { c.encoder.char_dim = to_size(k, v); }},
      {"char_filters", [](ModelConfig& c, auto& k, auto& v) { c.encoder.char_filters = to_size(k, v); }},
      {"char_width", [](ModelConfig& c, auto& k, auto& v) { c.encoder.char_width = to_size(k, v); }},
      {"hidden", [](ModelConfig& c, auto& k, auto& v) { c.encoder.hidden = to_size(k, v); }},
      {"layers", [](ModelConfig& c, auto& k, auto& v) { c.encoder.layers = to_size(k, v); }},
      {"highway", [](ModelConfig& c, auto& k, auto& v) { c.encoder.highway = to_bool(k, v); }},
      {"per_layer_concat",
       [](ModelConfig& c, auto& k, auto& v) { c.encoder.per_layer_concat = to_bool(k, v); }},
      {"use_chars", [](ModelConfig& c, auto& k, auto& v) { c.encoder.use_chars = to_bool(k, v); }},
      {"use_pos_input",
       [](ModelConfig& c, auto& k, auto& v) { c.encoder.use_pos_input = to_bool(k, v); }},
      {"use_stag_input",
       [](ModelConfig& c, auto& k, auto& v) { c.encoder.use_stag_input = to_bool(k, v); }},
      {"input_dropout",
       [](ModelConfig& c, auto& k, auto& v) { c.encoder.input_dropout = to_double(k, v); }},
      {"layer_dropout",
       [](ModelConfig& c, auto& k, auto& v) { c.encoder.layer_dropout = to_double(k, v); }},
      {"recurrent_dropout",
       [](ModelConfig& c, auto& k, auto& v) { c.encoder.recurrent_dropout = to_double(k, v); }},
      {"arc_mlp", [](ModelConfig& c, auto& k, auto& v) { c.heads.arc_dim = to_size(k, v); }},
      {"rel_mlp", [](ModelConfig& c, auto& k, auto& v) { c.heads.rel_dim = to_size(k, v); }},
      {"pos_mlp", [](ModelConfig& c, auto& k, auto& v) { c.heads.pos_dim = to_size(k, v); }},
      {"stag_mlp", [](ModelConfig& c, auto& k, auto& v) { c.heads.stag_dim = to_size(k, v); }},
      {"mlp_dropout", [](ModelConfig& c, auto& k, auto& v) { c.heads.mlp_dropout = to_double(k, v); }},
      {"rel_affine_uses_dep",
       [](ModelConfig& c, auto& k, auto& v) { c.heads.rel_affine_uses_dep = to_bool(k, v); }},
      {"label_on_gold_heads",
       [](ModelConfig& c, auto& k, auto& v) { c.heads.label_on_gold_heads = to_bool(k, v); }},
      {"mst_decoding", [](ModelConfig& c, auto& k, auto& v) { c.mst_decoding = to_bool(k, v); }},
  };
  return setters;
}

const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys{
      "mode",       "model",         "train",        "dev",       "input",
      "output",     "seed",          "pretrained",   "log",       "batch_size",
      "learning_rate", "patience",   "max_epochs",   "jackknife_folds", "shuffle_stag",
      "unk_replace", "dropout",      "threads"};
  return keys;
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = run_keys();
    for (const auto& [name, fn] : model_setters()) k.push_back(name);
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    std::string list;
    for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
    throw Error("unknown config key '" + key + "' (known: " + list + ")");
  }
  values_[key] = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

ModelConfig RunConfig::model_config(Mode fallback) const {
  const Mode mode = has("mode") ? parse_mode(*get("mode")) : fallback;
  ModelConfig c = ModelConfig::defaults(mode);
  for (const auto& [key, value] : values_) {
    auto it = model_setters().find(key);
    if (it != model_setters().end()) it->second(c, key, value);
  }
  c.encoder.validate();
  c.heads.validate();
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  for (const auto& [k, v] : values_) {
    if (k == "batch_size") t.batch_size = to_size(k, v);
    else if (k == "learning_rate") t.learning_rate = to_double(k, v);
    else if (k == "patience") t.patience = to_size(k, v);
    else if (k == "max_epochs") t.max_epochs = to_size(k, v);
    else if (k == "seed") t.seed = to_size(k, v);
    else if (k == "jackknife_folds") t.jackknife_folds = to_size(k, v);
    else if (k == "shuffle_stag") t.shuffle_stag = to_bool(k, v);
    else if (k == "unk_replace") t.unk_replace = to_double(k, v);
    else if (k == "dropout") t.dropout = to_bool(k, v);
    else if (k == "threads") t.threads = to_size(k, v);
  }
  t.validate();
  return t;
}

void RunConfig::check_compatible(const ModelConfig& loaded) const {
  if (has("mode") && parse_mode(*get("mode")) != loaded.mode) {
    throw Error("checkpoint is a " + std::string(to_string(loaded.mode)) +
                " model but the configuration asks for " + *get("mode"));
  }
  const nlohmann::json have = loaded.to_json();
  for (const auto& [key, value] : values_) {
    static const std::set<std::string> inference_only{"input_dropout", "layer_dropout",
                                                      "recurrent_dropout", "mlp_dropout",
                                                      "label_on_gold_heads", "mst_decoding"};
    auto it = model_setters().find(key);
    if (it == model_setters().end() || inference_only.count(key)) continue;
    ModelConfig probe = loaded;
    it->second(probe, key, value);
    if (probe.to_json() != have) {
      throw Error("configuration sets " + key + " = " + value +
                  ", which does not match the checkpoint");
    }
  }
}

}  // namespace graphtag
