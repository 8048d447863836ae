#include "graphtag/treeops.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <sstream>

#include "graphtag/tensor.hpp"
#include "graphtag/unicode.hpp"
#include "graphtag/vocab.hpp"

namespace graphtag {

DepGraph DepGraph::from_sentence(const Sentence& s) {
  DepGraph g;
  for (const Token& t : s.tokens) {
    g.add_token({t.form, simple_lemma(t.form), t.pred_pos.empty() ? t.gold_pos : t.pred_pos,
                 t.supertag});
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Token& t = s.tokens[i];
    if (t.head < 0) continue;
    g.add_arc(static_cast<int>(i + 1), t.head, canonical_relation(t.rel), std::string(kParsedOrigin));
  }
  return g;
}

const GraphToken& DepGraph::token(int i) const {
  static const GraphToken root{"<root>", "<root>", "ROOT", ""};
  if (i == 0) return root;
  if (i < 0 || static_cast<std::size_t>(i) > tokens_.size()) {
    throw Error("token index " + std::to_string(i) + " outside 0.." + std::to_string(size()));
  }
  return tokens_[i - 1];
}

bool DepGraph::has_arc(int child, int parent, std::string_view label) const {
  return index_.count({child, parent, std::string(label)}) > 0;
}

bool DepGraph::add_arc(int child, int parent, std::string label, std::string origin) {
  if (!index_.insert({child, parent, label}).second) return false;
  arcs_.push_back({child, parent, std::move(label), std::move(origin)});
  return true;
}

std::size_t DepGraph::parsed_arc_count() const {
  return static_cast<std::size_t>(std::count_if(
      arcs_.begin(), arcs_.end(), [](const GraphArc& a) { return a.origin == kParsedOrigin; }));
}

std::string simple_lemma(std::string_view word) {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"am", "be"},       {"is", "be"},         {"are", "be"},       {"was", "be"},
      {"were", "be"},     {"been", "be"},       {"being", "be"},     {"be", "be"},
      {"'s", "be"},       {"'re", "be"},        {"'m", "be"},        {"stay", "stay"},
      {"stays", "stay"},  {"stayed", "stay"},   {"staying", "stay"}, {"become", "become"},
      {"becomes", "become"}, {"became", "become"}, {"becoming", "become"}, {"seem", "seem"},
      {"seems", "seem"},  {"seemed", "seem"},   {"seeming", "seem"}, {"remain", "remain"},
      {"remains", "remain"}, {"remained", "remain"}, {"remaining", "remain"}};
  const std::string lower = ascii_lower(word);
  auto it = table.find(lower);
  return it == table.end() ? lower : it->second;
}

bool is_verb_pos(std::string_view pos) { return pos.substr(0, 2) == "VB"; }

bool is_wh_word(const GraphToken& t) {
  static const std::set<std::string, std::less<>> tags{"WDT", "WP", "WP$", "WRB"};
  static const std::set<std::string, std::less<>> words{"what", "which", "who",  "whom", "whose",
                                                        "where", "when", "why", "how"};
  return tags.count(t.pos) > 0 || words.count(ascii_lower(t.word)) > 0;
}

namespace {

bool is_relative_pronoun(const GraphToken& t) {
  static const std::set<std::string, std::less<>> tags{"WDT", "WP", "WP$"};
  static const std::set<std::string, std::less<>> words{"who", "whom", "which", "whose", "that"};
  return tags.count(t.pos) > 0 || words.count(ascii_lower(t.word)) > 0;
}

bool is_argument_label(std::string_view l) {
  return l == "0" || l == "1" || l == "2" || l == "3" || l == "4";
}

bool is_negation(const GraphToken& t) {
  const std::string w = ascii_lower(t.word);
  return w == "not" || w == "n't" || w == "never";
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Read-only view over the arcs present when a rule starts.
class Snapshot {
 public:
  explicit Snapshot(const DepGraph& g) : g_(g), arcs_(g.arcs()) {}

  const std::vector<GraphArc>& arcs() const { return arcs_; }
  const GraphToken& tok(int i) const { return g_.token(i); }
  std::vector<GraphArc> children(int parent) const {
    std::vector<GraphArc> out;
    for (const GraphArc& a : arcs_) {
      if (a.parent == parent) out.push_back(a);
    }
    return out;
  }
  std::vector<GraphArc> heads(int child) const {
    std::vector<GraphArc> out;
    for (const GraphArc& a : arcs_) {
      if (a.child == child) out.push_back(a);
    }
    return out;
  }
  bool has_child_with(int parent, std::string_view label) const {
    return std::any_of(arcs_.begin(), arcs_.end(),
                       [&](const GraphArc& a) { return a.parent == parent && a.label == label; });
  }
  // Tokens reachable from `top` along child arcs, excluding `top`.
  std::vector<int> descendants(int top) const {
    std::vector<int> out;
    std::vector<bool> seen(g_.size() + 1, false);
    std::vector<int> stack{top};
    seen[top] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const GraphArc& a : arcs_) {
        if (a.parent == v && a.child > 0 && !seen[a.child]) {
          seen[a.child] = true;
          out.push_back(a.child);
          stack.push_back(a.child);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const DepGraph& g_;
  std::vector<GraphArc> arcs_;
};

// Role of the relative clause headed by v: the catalog's role for v's
// supertag, else the label of a relative pronoun attached to v.
std::optional<std::string> relative_role(const Snapshot& s, int v, const SupertagCatalog& catalog) {
  if (const SupertagInfo* info = catalog.find(s.tok(v).supertag)) return info->relative_role;
  if (!is_verb_pos(s.tok(v).pos)) return std::nullopt;
  for (const GraphArc& a : s.children(v)) {
    if (a.child > 0 && is_relative_pronoun(s.tok(a.child)) && is_argument_label(a.label)) {
      return a.label;
    }
  }
  return std::nullopt;
}

class RuleContext {
 public:
  RuleContext(DepGraph& g, Rule rule) : g_(g), entry_{rule, {}} {}
  void add(int child, int parent, const std::string& label) {
    if (child == parent) return;
    const std::string origin(rule_id(entry_.rule));
    if (g_.add_arc(child, parent, label, origin)) entry_.added.push_back({child, parent, label, origin});
  }
  TraceEntry take() { return std::move(entry_); }

 private:
  DepGraph& g_;
  TraceEntry entry_;
};

void relative_clause(const Snapshot& s, RuleContext& out, const SupertagCatalog& catalog) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "adj" || a.parent == 0) continue;
    if (is_verb_pos(s.tok(a.parent).pos)) continue;
    if (auto role = relative_role(s, a.child, catalog)) out.add(a.parent, a.child, *role);
  }
}

bool is_copular_lemma(const std::string& lemma) {
  static const std::set<std::string, std::less<>> copulas{"be", "stay", "become", "seem", "remain"};
  return copulas.count(lemma) > 0;
}

void sentential_complement(const Snapshot& s, RuleContext& out, const SupertagCatalog& catalog) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "adj" || a.parent == 0) continue;
    bool predicative;
    if (const SupertagInfo* info = catalog.find(s.tok(a.child).supertag)) {
      predicative = info->predicative_auxiliary;
    } else {
      predicative = is_verb_pos(s.tok(a.child).pos) && is_verb_pos(s.tok(a.parent).pos) &&
                    !is_copular_lemma(s.tok(a.child).lemma) && s.has_child_with(a.child, "0");
    }
    if (predicative) out.add(a.parent, a.child, "1");
  }
}

// Coordinator c adjoined to v1 with second conjunct v2 substituted into c.
template <typename Fn>
void for_each_coordination(const Snapshot& s, Fn fn) {
  for (const GraphArc& first : s.arcs()) {
    if (first.label != "adj" || first.parent == 0 || s.tok(first.child).pos != "CC") continue;
    for (const GraphArc& second : s.children(first.child)) {
      if (second.label == "1" && second.child > 0) fn(first.parent, second.child);
    }
  }
}

void vp_coordination(const Snapshot& s, RuleContext& out) {
  for_each_coordination(s, [&](int v1, int v2) {
    if (!is_verb_pos(s.tok(v1).pos) || !is_verb_pos(s.tok(v2).pos)) return;
    if (s.has_child_with(v2, "0")) return;
    for (const GraphArc& a : s.children(v1)) {
      if (a.label == "0") {
        out.add(a.child, v2, "0");
      } else if (a.label == "adj" && (s.tok(a.child).pos == "MD" || is_negation(s.tok(a.child)))) {
        out.add(a.child, v2, "adj");
      }
    }
  });
}

void relative_clause_coordination(const Snapshot& s, RuleContext& out,
                                  const SupertagCatalog& catalog) {
  for_each_coordination(s, [&](int v1, int v2) {
    if (!relative_role(s, v1, catalog)) return;
    for (const GraphArc& mod : s.heads(v1)) {
      if (mod.label != "adj" || mod.parent == 0) continue;
      const int noun = mod.parent;
      for (int w : s.descendants(v2)) {
        if (!is_relative_pronoun(s.tok(w))) continue;
        for (const GraphArc& a : s.heads(w)) {
          if (a.parent > 0 && is_argument_label(a.label)) out.add(noun, a.parent, a.label);
        }
      }
    }
  });
}

void small_clause(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "1" || a.parent == 0 || is_verb_pos(s.tok(a.child).pos)) continue;
    if (s.tok(a.parent).lemma == "be" || is_wh_word(s.tok(a.child))) continue;
    for (const GraphArc& subj : s.children(a.child)) {
      if (subj.label == "0") out.add(subj.child, a.parent, "1");
    }
  }
}

void co_anchor(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& co : s.arcs()) {
    if (co.label != "CO" || co.parent == 0) continue;
    for (const GraphArc& a : s.children(co.parent)) {
      if (a.child != co.child) out.add(a.child, co.child, a.label);
    }
  }
}

void wh_word(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "adj" || a.parent == 0 || !is_wh_word(s.tok(a.parent))) continue;
    for (const GraphArc& up : s.heads(a.parent)) out.add(a.child, up.parent, up.label);
  }
}

void copula_be(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& a : s.arcs()) {
    if (a.parent == 0 || a.label == "0" || !is_argument_label(a.label)) continue;
    if (s.tok(a.parent).lemma != "be" || !is_wh_word(s.tok(a.child))) continue;
    out.add(a.parent, a.child, "0");
    for (const GraphArc& subj : s.children(a.parent)) {
      if (subj.label == "0") out.add(subj.child, a.child, "0");
    }
  }
}

void copula_non_be(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "adj" || a.parent == 0) continue;
    const std::string& lemma = s.tok(a.child).lemma;
    if (lemma == "be" || !is_copular_lemma(lemma)) continue;
    for (const GraphArc& c : s.children(a.parent)) {
      if (c.child != a.child) out.add(c.child, a.child, c.label);
    }
  }
}

void partitive(const Snapshot& s, RuleContext& out) {
  static const std::set<std::string, std::less<>> heads{"lot", "lots", "kind", "kinds", "none"};
  for (const GraphArc& a : s.arcs()) {
    const int q = a.parent, of = a.child;
    if (a.label != "adj" || q == 0 || of != q + 1) continue;
    if (!heads.count(ascii_lower(s.tok(q).word)) || ascii_lower(s.tok(of).word) != "of") continue;
    for (const GraphArc& obj : s.children(of)) {
      if (obj.label != "1") continue;
      for (const GraphArc& up : s.heads(q)) out.add(obj.child, up.parent, up.label);
    }
  }
}

void modal(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& m : s.arcs()) {
    if (m.label != "adj" || m.parent == 0 || s.tok(m.child).pos != "MD") continue;
    for (const GraphArc& x : s.children(m.parent)) {
      if (x.label == "adj" && x.child > m.child && is_verb_pos(s.tok(x.child).pos)) {
        out.add(m.child, x.child, "adj");
      }
    }
  }
}

void existential_there(const Snapshot& s, RuleContext& out) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "0" || a.parent == 0) continue;
    const GraphToken& t = s.tok(a.child);
    if (t.pos == "EX" || ascii_lower(t.word) == "there") out.add(a.parent, a.child, "0");
  }
}

void determiner_sentence(const Snapshot& s, RuleContext& out, std::size_t n) {
  for (const GraphArc& a : s.arcs()) {
    if (a.label != "adj" || a.parent == 0 || s.tok(a.child).pos != "DT") continue;
    if (!is_verb_pos(s.tok(a.parent).pos)) continue;
    std::size_t k = static_cast<std::size_t>(a.child) + 1;
    while (k <= n && starts_with(s.tok(static_cast<int>(k)).pos, "RB")) ++k;
    if (k <= n && starts_with(s.tok(static_cast<int>(k)).pos, "JJ")) {
      out.add(static_cast<int>(k), a.parent, "1");
    }
  }
}

}  // namespace

SupertagCatalog SupertagCatalog::parse(std::istream& in, const std::string& source) {
  SupertagCatalog c;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string tag, feature;
    fields >> tag;
    SupertagInfo info;
    while (fields >> feature) {
      if (feature == "predicative-auxiliary") {
        info.predicative_auxiliary = true;
      } else if (starts_with(feature, "relative=") && feature.size() > 9) {
        info.relative_role = canonical_relation(feature.substr(9));
      } else {
        throw Error(source + ":" + std::to_string(lineno) + ": unknown supertag feature '" +
                    feature + "' (expected relative=<label> or predicative-auxiliary)");
      }
    }
    c.set(tag, info);
  }
  return c;
}

SupertagCatalog SupertagCatalog::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open supertag feature file " + path.string());
  return parse(in, path.string());
}

const SupertagInfo* SupertagCatalog::find(const std::string& supertag) const {
  auto it = entries_.find(supertag);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

constexpr std::array<std::pair<Rule, std::string_view>, 13> kRuleIds{{
    {Rule::relative_clause, "relative-clause"},
    {Rule::sentential_complement, "sentential-complement"},
    {Rule::vp_coordination, "vp-coordination"},
    {Rule::relative_clause_coordination, "relative-clause-coordination"},
    {Rule::small_clause, "small-clause"},
    {Rule::co_anchor, "co-anchor"},
    {Rule::wh_word, "wh-word"},
    {Rule::copula_be, "copula-be"},
    {Rule::copula_non_be, "copula-non-be"},
    {Rule::partitive, "partitive"},
    {Rule::modal, "modal"},
    {Rule::existential_there, "existential-there"},
    {Rule::determiner_sentence, "determiner-sentence"},
}};

}  // namespace

std::string_view rule_id(Rule rule) {
  for (const auto& [r, id] : kRuleIds) {
    if (r == rule) return id;
  }
  return "?";
}

Rule parse_rule(std::string_view id) {
  for (const auto& [r, name] : kRuleIds) {
    if (name == id) return r;
  }
  throw Error("unknown rule '" + std::string(id) + "'");
}

const std::vector<Rule>& all_rules() {
  static const std::vector<Rule> rules = [] {
    std::vector<Rule> v;
    for (const auto& [r, id] : kRuleIds) v.push_back(r);
    return v;
  }();
  return rules;
}

const std::vector<Rule>& pete_rules() {
  static const std::vector<Rule> rules{Rule::relative_clause, Rule::sentential_complement,
                                       Rule::vp_coordination, Rule::relative_clause_coordination};
  return rules;
}

TraceEntry apply_rule(DepGraph& graph, Rule rule, const SupertagCatalog& catalog) {
  const Snapshot s(graph);
  RuleContext out(graph, rule);
  switch (rule) {
    case Rule::relative_clause: relative_clause(s, out, catalog); break;
    case Rule::sentential_complement: sentential_complement(s, out, catalog); break;
    case Rule::vp_coordination: vp_coordination(s, out); break;
    case Rule::relative_clause_coordination: relative_clause_coordination(s, out, catalog); break;
    case Rule::small_clause: small_clause(s, out); break;
    case Rule::co_anchor: co_anchor(s, out); break;
    case Rule::wh_word: wh_word(s, out); break;
    case Rule::copula_be: copula_be(s, out); break;
    case Rule::copula_non_be: copula_non_be(s, out); break;
    case Rule::partitive: partitive(s, out); break;
    case Rule::modal: modal(s, out); break;
    case Rule::existential_there: existential_there(s, out); break;
    case Rule::determiner_sentence: determiner_sentence(s, out, graph.size()); break;
  }
  return out.take();
}

RuleTrace apply_rules(DepGraph& graph, const std::vector<Rule>& rules,
                      const SupertagCatalog& catalog) {
  RuleTrace trace;
  for (Rule r : rules) trace.push_back(apply_rule(graph, r, catalog));
  return trace;
}

RuleTrace apply_udr_pipeline(DepGraph& graph, const SupertagCatalog& catalog) {
  return apply_rules(graph, all_rules(), catalog);
}

DepGraph replay_trace(const DepGraph& input, const RuleTrace& trace) {
  DepGraph g = input;
  for (const TraceEntry& e : trace) {
    for (const GraphArc& a : e.added) g.add_arc(a.child, a.parent, a.label, a.origin);
  }
  return g;
}

std::string format_graph(const DepGraph& graph) {
  std::ostringstream out;
  for (const GraphArc& a : graph.arcs()) {
    out << a.child << '(' << graph.token(a.child).word << ")\t" << a.parent << '('
        << graph.token(a.parent).word << ")\t" << a.label << '\t' << a.origin << '\n';
  }
  return out.str();
}

std::string format_trace(const DepGraph& graph, const RuleTrace& trace) {
  std::ostringstream out;
  for (const TraceEntry& e : trace) {
    if (e.added.empty()) continue;
    out << rule_id(e.rule) << ':';
    for (const GraphArc& a : e.added) {
      out << " (" << graph.token(a.child).word << ", " << graph.token(a.parent).word << ", "
          << a.label << ')';
    }
    out << '\n';
  }
  return out.str();
}

bool contains_arc(const DepGraph& graph, int child, int parent, std::string_view label) {
  const auto n = static_cast<int>(graph.size());
  if (child < 1 || child > n || parent < 0 || parent > n) {
    throw Error("arc (" + std::to_string(child) + ", " + std::to_string(parent) +
                ") outside a graph of " + std::to_string(n) + " tokens");
  }
  return graph.has_arc(child, parent, canonical_relation(label));
}

bool is_content_word(const GraphToken& t) {
  static constexpr std::array<std::string_view, 7> prefixes{"NN", "VB", "JJ", "RB", "PRP", "CD", "FW"};
  if (is_pure_punctuation(t.word)) return false;
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](std::string_view p) { return starts_with(t.pos, p); });
}

PeteResult pete_check(DepGraph premise, DepGraph hypothesis, const PeteOptions& options) {
  if (premise.parsed_arc_count() == 0) throw Error("premise has no parsed arcs");
  if (hypothesis.parsed_arc_count() == 0) throw Error("hypothesis has no parsed arcs");
  const std::vector<Rule>& rules = options.pete_rules_only ? pete_rules() : all_rules();
  apply_rules(premise, rules, options.catalog);
  apply_rules(hypothesis, rules, options.catalog);

  std::set<std::tuple<std::string, std::string, std::string>> premise_arcs;
  for (const GraphArc& a : premise.arcs()) {
    premise_arcs.insert({ascii_lower(premise.token(a.child).word),
                         ascii_lower(premise.token(a.parent).word), a.label});
  }
  PeteResult result;
  result.entails = true;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const GraphArc& a : hypothesis.arcs()) {
    if (a.parent == 0) continue;
    const GraphToken& c = hypothesis.token(a.child);
    const GraphToken& p = hypothesis.token(a.parent);
    if (!is_content_word(c) || !is_content_word(p)) continue;
    ArcCheck check{ascii_lower(c.word), ascii_lower(p.word), a.label, false};
    if (!seen.insert({check.child, check.parent, check.label}).second) continue;
    check.found = premise_arcs.count({check.child, check.parent, check.label}) > 0;
    result.entails = result.entails && check.found;
    result.checks.push_back(std::move(check));
  }
  return result;
}

}  // namespace graphtag
