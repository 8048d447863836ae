#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "graphtag/sentence.hpp"

namespace graphtag {

struct GraphToken {
  std::string word;
  std::string lemma;
  std::string pos;
  std::string supertag;
};

inline constexpr std::string_view kParsedOrigin = "parsed";

struct GraphArc {
  int child = 0;
  int parent = 0;
  std::string label;
  std::string origin{kParsedOrigin};
};

// Tokens 1..n plus ROOT (0) and a set of labeled arcs. Parsed arcs come from
// a derivation tree; rules add arcs and never remove them.
class DepGraph {
 public:
  DepGraph() = default;
  // Uses the predicted POS column when present, else gold POS. Relations are
  // canonicalized. Tokens with no head contribute no arc.
  static DepGraph from_sentence(const Sentence& s);

  std::size_t size() const { return tokens_.size(); }
  const GraphToken& token(int i) const;
  void add_token(GraphToken t) { tokens_.push_back(std::move(t)); }

  const std::vector<GraphArc>& arcs() const { return arcs_; }
  bool has_arc(int child, int parent, std::string_view label) const;
  // False (and no change) when the triple is already present.
  bool add_arc(int child, int parent, std::string label, std::string origin);
  std::size_t parsed_arc_count() const;

 private:
  std::vector<GraphToken> tokens_;
  std::vector<GraphArc> arcs_;
  std::set<std::tuple<int, int, std::string>> index_;
};

// Lowercased lemma for the word classes the rules inspect (forms of be and
// the non-be copulas); other words return their lowercased form.
std::string simple_lemma(std::string_view word);
bool is_verb_pos(std::string_view pos);
bool is_wh_word(const GraphToken& t);

// Per-supertag properties used by the rules.
struct SupertagInfo {
  std::optional<std::string> relative_role;  // relative-clause tree and its extracted role
  bool predicative_auxiliary = false;
};

class SupertagCatalog {
 public:
  // Lines "supertag<TAB>feature ..." with features "relative=<label>" and
  // "predicative-auxiliary"; "#" lines are comments.
  static SupertagCatalog read(const std::filesystem::path& path);
  static SupertagCatalog parse(std::istream& in, const std::string& source);

  void set(const std::string& supertag, SupertagInfo info) { entries_[supertag] = std::move(info); }
  const SupertagInfo* find(const std::string& supertag) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, SupertagInfo> entries_;
};

enum class Rule {
  relative_clause,
  sentential_complement,
  vp_coordination,
  relative_clause_coordination,
  small_clause,
  co_anchor,
  wh_word,
  copula_be,
  copula_non_be,
  partitive,
  modal,
  existential_there,
  determiner_sentence,
};

std::string_view rule_id(Rule rule);
Rule parse_rule(std::string_view id);
// Pipeline order.
const std::vector<Rule>& all_rules();
// The first three rule groups, shared with entailment checking.
const std::vector<Rule>& pete_rules();

struct TraceEntry {
  Rule rule;
  std::vector<GraphArc> added;
};

using RuleTrace = std::vector<TraceEntry>;

// Applies one rule over a snapshot of the arcs; returns the arcs it added.
TraceEntry apply_rule(DepGraph& graph, Rule rule, const SupertagCatalog& catalog = {});
RuleTrace apply_rules(DepGraph& graph, const std::vector<Rule>& rules,
                      const SupertagCatalog& catalog = {});
RuleTrace apply_udr_pipeline(DepGraph& graph, const SupertagCatalog& catalog = {});
// Adds the traced arcs to a copy of `input`.
DepGraph replay_trace(const DepGraph& input, const RuleTrace& trace);

// One "child<TAB>parent<TAB>label<TAB>origin" line per arc, in insertion
// order, with word forms in parentheses.
std::string format_graph(const DepGraph& graph);
std::string format_trace(const DepGraph& graph, const RuleTrace& trace);

// Errors when an index is outside 0..n.
bool contains_arc(const DepGraph& graph, int child, int parent, std::string_view label);

struct ArcCheck {
  std::string child;
  std::string parent;
  std::string label;
  bool found = false;
};

struct PeteResult {
  bool entails = false;
  std::vector<ArcCheck> checks;
};

struct PeteOptions {
  // Only the relative-clause, sentential-complement and coordination rules.
  bool pete_rules_only = false;
  SupertagCatalog catalog;
};

// Transforms both graphs, then requires every hypothesis arc between two
// content words to appear in the premise, matching words by lowercased form.
PeteResult pete_check(DepGraph premise, DepGraph hypothesis, const PeteOptions& options = {});
bool is_content_word(const GraphToken& t);

}  // namespace graphtag
