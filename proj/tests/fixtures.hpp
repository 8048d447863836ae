#pragma once

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "graphtag/rng.hpp"
#include "graphtag/sentence.hpp"
#include "graphtag/treeops.hpp"

// Hand-built graphs and corpora shared by the unit and acceptance tests.
namespace graphtag::testing {

struct Row {
  const char* word;
  const char* pos;
  int head;
  const char* rel;
  const char* stag = "";
};

inline Sentence sentence_of(std::initializer_list<Row> rows, const std::string& id = "") {
  Sentence s;
  for (const Row& r : rows) s.tokens.push_back({r.word, r.pos, "", r.stag, r.head, r.rel});
  if (!id.empty()) s.set_id(id);
  return s;
}

inline DepGraph graph_of(std::initializer_list<Row> rows) {
  return DepGraph::from_sentence(sentence_of(rows));
}

using ArcSet = std::set<std::tuple<int, int, std::string>>;

inline ArcSet arcs_added(const DepGraph& g, Rule rule, const SupertagCatalog& catalog = {}) {
  DepGraph copy = g;
  ArcSet out;
  for (const GraphArc& a : apply_rule(copy, rule, catalog).added) out.insert({a.child, a.parent, a.label});
  return out;
}

// "that is exactly what I 'm hoping for"
inline DepGraph hoping_for() {
  return graph_of({{"that", "DT", 2, "0"},
                   {"is", "VBZ", 0, "ROOT"},
                   {"exactly", "RB", 7, "adj"},
                   {"what", "WP", 7, "1"},
                   {"I", "PRP", 7, "0"},
                   {"'m", "VBP", 7, "adj"},
                   {"hoping", "VBG", 2, "1"},
                   {"for", "IN", 7, "CO"}});
}

// "What songs did he sing ?"
inline DepGraph what_songs() {
  return graph_of({{"What", "WDT", 5, "1"},
                   {"songs", "NNS", 1, "adj"},
                   {"did", "VBD", 5, "adj"},
                   {"he", "PRP", 5, "0"},
                   {"sing", "VB", 0, "ROOT"},
                   {"?", ".", 5, "adj"}});
}

// "the man who sang and who danced left"
inline DepGraph coordinated_relatives() {
  return graph_of({{"the", "DT", 2, "adj"},
                   {"man", "NN", 8, "0"},
                   {"who", "WP", 4, "0"},
                   {"sang", "VBD", 2, "adj"},
                   {"and", "CC", 4, "adj"},
                   {"who", "WP", 7, "0"},
                   {"danced", "VBD", 5, "1"},
                   {"left", "VBD", 0, "ROOT"}});
}

// "I hope for he wins": the complement arc is copied to the co-anchor only
// when complements run before co-anchors.
inline DepGraph order_fixture() {
  return graph_of({{"I", "PRP", 2, "0"},
                   {"hope", "VBP", 5, "adj"},
                   {"for", "IN", 2, "CO"},
                   {"he", "PRP", 5, "0"},
                   {"wins", "VBZ", 0, "ROOT"}});
}

struct RuleFixture {
  std::string name;
  Rule rule;
  DepGraph graph;
  ArcSet expected;
  SupertagCatalog catalog;
};

inline std::vector<RuleFixture> rule_fixtures() {
  SupertagCatalog relative;
  relative.set("tRel1", {std::string("1"), false});
  SupertagCatalog predicative;
  predicative.set("tPA", {std::nullopt, true});
  return {
      {"CoAnchorHopingFor", Rule::co_anchor, hoping_for(),
       {{3, 8, "adj"}, {4, 8, "1"}, {5, 8, "0"}, {6, 8, "adj"}}, {}},
      {"WhDeterminerWhatSongs", Rule::wh_word, what_songs(), {{2, 5, "1"}}, {}},
      {"RelativeClausePronoun", Rule::relative_clause,
       graph_of({{"the", "DT", 2, "adj"},
                 {"man", "NN", 6, "0"},
                 {"who", "WP", 5, "1"},
                 {"you", "PRP", 5, "0"},
                 {"saw", "VBD", 2, "adj"},
                 {"left", "VBD", 0, "ROOT"}}),
       {{2, 5, "1"}}, {}},
      {"RelativeClauseCatalog", Rule::relative_clause,
       graph_of({{"the", "DT", 2, "adj"},
                 {"book", "NN", 5, "0"},
                 {"John", "NNP", 4, "0"},
                 {"wrote", "VBD", 2, "adj", "tRel1"},
                 {"fell", "VBD", 0, "ROOT"}}),
       {{2, 4, "1"}}, relative},
      {"SententialComplement", Rule::sentential_complement,
       graph_of({{"I", "PRP", 2, "0"}, {"think", "VBP", 4, "adj"}, {"he", "PRP", 4, "0"}, {"left", "VBD", 0, "ROOT"}}),
       {{4, 2, "1"}}, {}},
      {"SententialComplementCatalog", Rule::sentential_complement,
       graph_of({{"he", "PRP", 3, "0"}, {"seems", "VBZ", 3, "adj", "tPA"}, {"left", "VBD", 0, "ROOT"}}),
       {{3, 2, "1"}}, predicative},
      {"VpCoordination", Rule::vp_coordination,
       graph_of({{"John", "NNP", 2, "0"}, {"sang", "VBD", 0, "ROOT"}, {"and", "CC", 2, "adj"}, {"danced", "VBD", 3, "1"}}),
       {{1, 4, "0"}}, {}},
      {"VpCoordinationModal", Rule::vp_coordination,
       graph_of({{"John", "NNP", 3, "0"},
                 {"will", "MD", 3, "adj"},
                 {"sing", "VB", 0, "ROOT"},
                 {"and", "CC", 3, "adj"},
                 {"dance", "VB", 4, "1"}}),
       {{1, 5, "0"}, {2, 5, "adj"}}, {}},
      {"RelativeClauseCoordination", Rule::relative_clause_coordination, coordinated_relatives(),
       {{2, 7, "0"}}, {}},
      {"SmallClause", Rule::small_clause,
       graph_of({{"I", "PRP", 2, "0"}, {"consider", "VBP", 0, "ROOT"}, {"him", "PRP", 4, "0"}, {"smart", "JJ", 2, "1"}}),
       {{3, 2, "1"}}, {}},
      {"CopulaBe", Rule::copula_be,
       graph_of({{"What", "WP", 2, "1"},
                 {"is", "VBZ", 0, "ROOT"},
                 {"the", "DT", 4, "adj"},
                 {"capital", "NN", 2, "0"},
                 {"?", ".", 2, "adj"}}),
       {{2, 1, "0"}, {4, 1, "0"}}, {}},
      {"CopulaNonBe", Rule::copula_non_be,
       graph_of({{"He", "PRP", 3, "0"}, {"seems", "VBZ", 3, "adj"}, {"happy", "JJ", 0, "ROOT"}}),
       {{1, 2, "0"}}, {}},
      {"Partitive", Rule::partitive,
       graph_of({{"a", "DT", 2, "adj"},
                 {"lot", "NN", 5, "0"},
                 {"of", "IN", 2, "adj"},
                 {"people", "NNS", 3, "1"},
                 {"came", "VBD", 0, "ROOT"}}),
       {{4, 5, "0"}}, {}},
      {"Modal", Rule::modal,
       graph_of({{"He", "PRP", 4, "0"}, {"could", "MD", 4, "adj"}, {"have", "VB", 4, "adj"}, {"gone", "VBN", 0, "ROOT"}}),
       {{2, 3, "adj"}}, {}},
      {"ExistentialThere", Rule::existential_there,
       graph_of({{"There", "EX", 2, "0"}, {"is", "VBZ", 0, "ROOT"}, {"a", "DT", 4, "adj"}, {"dog", "NN", 2, "1"}}),
       {{2, 1, "0"}}, {}},
      {"DeterminerSentence", Rule::determiner_sentence,
       graph_of({{"All", "DT", 6, "adj"},
                 {"very", "RB", 3, "adj"},
                 {"quiet", "JJ", 1, "1"},
                 {",", ",", 6, "adj"},
                 {"they", "PRP", 6, "0"},
                 {"slept", "VBD", 0, "ROOT"}}),
       {{3, 6, "1"}}, {}},
  };
}

inline Sentence flat_tree(std::vector<std::string> forms, std::vector<int> heads, std::vector<std::string> rels) {
  Sentence s;
  for (std::size_t i = 0; i < forms.size(); ++i) s.tokens.push_back({forms[i], "NN", "NN", "t1", heads[i], rels[i]});
  return s;
}

// "Hi there ." with the period attached to the wrong head and relation.
inline std::pair<Corpus, Corpus> punctuation_fixture() {
  return {{flat_tree({"Hi", "there", "."}, {0, 1, 2}, {"ROOT", "adj", "0"})},
          {flat_tree({"Hi", "there", "."}, {0, 1, 1}, {"ROOT", "adj", "adj"})}};
}

// Ten 3-token sentences "a b c" with gold heads (2, 0, 2):
//   1-5 predicted exactly; 6-7 attach c to a; 8-10 mislabel a.
// Sentence 10 carries a misattached period that must not count.
// Returns (pred, gold).
inline std::pair<Corpus, Corpus> bucket_fixture() {
  Corpus gold, pred;
  for (int s = 1; s <= 10; ++s) {
    Sentence g = flat_tree({"a", "b", "c"}, {2, 0, 2}, {"0", "ROOT", "1"});
    Sentence p = g;
    if (s == 6 || s == 7) p.tokens[2].head = 1;
    if (s >= 8) p.tokens[0].rel = "adj";
    if (s == 10) {
      g.tokens.push_back({".", ".", ".", "t2", 2, "adj"});
      p.tokens.push_back({".", ".", ".", "t2", 1, "adj"});
    }
    gold.push_back(g);
    pred.push_back(p);
  }
  return {pred, gold};
}

// Gold with 40% of heads and labels resampled.
inline Corpus random_predictions(const Corpus& gold, Rng& rng) {
  Corpus pred = gold;
  for (Sentence& s : pred) {
    for (Token& t : s.tokens) {
      if (rng.bernoulli(0.4)) t.head = static_cast<int>(rng.below(s.size() + 1));
      if (rng.bernoulli(0.4)) t.rel = rng.bernoulli(0.5) ? "0" : "adj";
    }
  }
  return pred;
}

}  // namespace graphtag::testing
