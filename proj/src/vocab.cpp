#include "graphtag/vocab.hpp"

#include <nlohmann/json.hpp>

#include "graphtag/tensor.hpp"
#include "graphtag/unicode.hpp"

namespace graphtag {

SymbolTable::SymbolTable(bool reserved) : reserved_(reserved) {
  if (reserved_) {
    add("<pad>");
    add("<unk>");
    add("<root>");
  }
}

int SymbolTable::add(std::string_view symbol) {
  if (auto id = find(symbol)) return *id;
  const int id = static_cast<int>(symbols_.size());
  symbols_.emplace_back(symbol);
  ids_.emplace(symbols_.back(), id);
  return id;
}

std::optional<int> SymbolTable::find(std::string_view symbol) const {
  auto it = ids_.find(std::string(symbol));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int SymbolTable::lookup(std::string_view symbol) const {
  if (auto id = find(symbol)) return *id;
  if (reserved_) return kUnk;
  std::string known;
  for (const auto& s : symbols_) known += (known.empty() ? "" : ", ") + s;
  throw Error("unknown symbol '" + std::string(symbol) + "' (known: " + known + ")");
}

const std::string& SymbolTable::symbol(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size()) {
    throw Error("symbol id " + std::to_string(id) + " out of range");
  }
  return symbols_[id];
}

nlohmann::json SymbolTable::to_json() const {
  return {{"reserved", reserved_}, {"symbols", symbols_}};
}

SymbolTable SymbolTable::from_json(const nlohmann::json& j) {
  SymbolTable t(false);
  t.reserved_ = j.at("reserved").get<bool>();
  for (const auto& s : j.at("symbols")) t.add(s.get<std::string>());
  return t;
}

std::string canonical_relation(std::string_view label) {
  const std::string lower = ascii_lower(label);
  if (lower == "adj") return "adj";
  if (lower == "co") return "CO";
  return std::string(label);
}

Vocabulary::Vocabulary() {
  for (auto r : kBaseRelations) rels.add(r);
  word_counts.assign(words.size(), 0);
}

std::string Vocabulary::word_key(std::string_view form) { return ascii_lower(form); }

Vocabulary Vocabulary::build(const Corpus& train) {
  Vocabulary v;
  for (const Sentence& s : train) {
    for (const Token& t : s.tokens) {
      const int wid = v.words.add(word_key(t.form));
      if (static_cast<std::size_t>(wid) >= v.word_counts.size()) v.word_counts.resize(wid + 1, 0);
      ++v.word_counts[wid];
      for (const std::string& c : utf8_chars(t.form)) v.chars.add(c);
      if (!t.gold_pos.empty()) v.pos.add(t.gold_pos);
      if (!t.pred_pos.empty()) v.pos.add(t.pred_pos);
      if (!t.supertag.empty()) v.stags.add(t.supertag);
      if (!t.rel.empty()) v.rels.add(canonical_relation(t.rel));
    }
  }
  return v;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"words", words.to_json()}, {"chars", chars.to_json()}, {"pos", pos.to_json()},
          {"stags", stags.to_json()}, {"rels", rels.to_json()},   {"word_counts", word_counts}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  v.words = SymbolTable::from_json(j.at("words"));
  v.chars = SymbolTable::from_json(j.at("chars"));
  v.pos = SymbolTable::from_json(j.at("pos"));
  v.stags = SymbolTable::from_json(j.at("stags"));
  v.rels = SymbolTable::from_json(j.at("rels"));
  v.word_counts = j.at("word_counts").get<std::vector<std::size_t>>();
  return v;
}

}  // namespace graphtag
