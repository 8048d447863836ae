#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "graphtag/sentence.hpp"

namespace graphtag {

// Dense string <-> id table. Tables built with reserved ids start with
// PAD, UNK and ROOT.
class SymbolTable {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kRoot = 2;

  explicit SymbolTable(bool reserved = true);

  int add(std::string_view symbol);
  std::optional<int> find(std::string_view symbol) const;
  // Unknown symbols map to UNK in reserved tables and throw otherwise.
  int lookup(std::string_view symbol) const;
  const std::string& symbol(int id) const;
  std::size_t size() const { return symbols_.size(); }
  bool reserved() const { return reserved_; }

  nlohmann::json to_json() const;
  static SymbolTable from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
  bool reserved_;
};

// Derivation-tree relations always present, in id order.
inline constexpr std::array<std::string_view, 7> kBaseRelations{"0", "1", "2", "3", "4", "CO",
                                                                 "adj"};

// "ADJ" and "adj" name the same relation, likewise "co" and "CO".
std::string canonical_relation(std::string_view label);

struct Vocabulary {
  SymbolTable words;
  SymbolTable chars;
  SymbolTable pos;
  SymbolTable stags;
  SymbolTable rels{false};
  // Training frequency per word id (0 for reserved and pretrained-only words).
  std::vector<std::size_t> word_counts;

  Vocabulary();

  static Vocabulary build(const Corpus& train);
  // Word-table key for a surface form (lowercased).
  static std::string word_key(std::string_view form);

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);
};

}  // namespace graphtag
