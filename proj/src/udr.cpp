#include "graphtag/udr.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "graphtag/tensor.hpp"
#include "graphtag/unicode.hpp"

namespace graphtag {

const std::vector<std::string_view>& udr_label_inventory() {
  static const std::vector<std::string_view> labels{
      "abbrev", "acomp", "advcl",    "advmod",    "agent", "amod",      "appos",  "attr",
      "aux",    "auxpass", "cc",     "ccomp",     "complm", "conj",     "cop",    "csubj",
      "csubjpass", "dep", "det",     "dobj",      "expl",  "infmod",    "iobj",   "mark",
      "mwe",    "neg",    "nn",      "npadvmod",  "nsubj", "nsubjpass", "num",    "number",
      "obj2",   "parataxis", "partmod", "pcomp",  "pobj",  "poss",      "possessive", "preconj",
      "predet", "prep",   "prepc",   "prt",       "punct", "purpcl",    "quantmod", "rcmod",
      "ref",    "rel",    "root",    "tmod",      "xcomp", "xsubj"};
  return labels;
}

namespace {

bool is_wh_adverb(const GraphToken& t) {
  if (t.pos == "WRB") return true;
  const std::string w = ascii_lower(t.word);
  return w == "where" || w == "when" || w == "why" || w == "how";
}

}  // namespace

std::string convert_udr_label(const UdrTarget& target, const DepGraph& graph) {
  const auto& inventory = udr_label_inventory();
  if (std::find(inventory.begin(), inventory.end(), target.label) == inventory.end()) {
    std::string known;
    for (auto l : inventory) known += (known.empty() ? "" : ", ") + std::string(l);
    throw Error("unknown UDR label '" + target.label + "' (known: " + known + ")");
  }
  const GraphToken& child = graph.token(target.child);
  const GraphToken& parent = graph.token(target.parent);
  if (is_verb_pos(parent.pos) && is_wh_adverb(child)) return "adj";
  const std::string& l = target.label;
  if (l == "nsubj" && target.construction == "SbEm") {
    static const std::set<std::string, std::less<>> causative{"shut", "open",  "close", "break",
                                                              "stop", "start", "move",  "turn"};
    if ((parent.pos == "VB" || parent.pos == "VBN") && causative.count(parent.lemma)) return "1";
  }
  if (l == "nsubj" || l == "cop") return "0";
  if (l == "dobj" || l == "pobj" || l == "obj2" || l == "nsubjpass") return "1";
  return "adj";
}

std::vector<UdrTarget> read_udr_targets(std::istream& in, const std::string& source) {
  std::vector<UdrTarget> targets;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream fields(line);
    for (std::string c; std::getline(fields, c, '\t');) cols.push_back(c);
    auto fail = [&](const std::string& what) -> Error {
      return Error(source + ":" + std::to_string(lineno) + ": " + what);
    };
    if (cols.size() != 5) throw fail("expected 5 tab-separated columns");
    if (std::find(kConstructions.begin(), kConstructions.end(), cols[1]) == kConstructions.end()) {
      throw fail("unknown construction '" + cols[1] + "'");
    }
    UdrTarget t;
    t.sentence_id = cols[0];
    t.construction = cols[1];
    try {
      std::size_t used = 0;
      t.child = std::stoi(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("");
      t.parent = std::stoi(cols[3], &used);
      if (used != cols[3].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw fail("token indices must be integers");
    }
    t.label = cols[4];
    targets.push_back(std::move(t));
  }
  return targets;
}

std::vector<UdrTarget> read_udr_targets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open target file " + path.string());
  return read_udr_targets(in, path.string());
}

double UdrReport::average_accuracy() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [name, score] : by_construction) {
    if (score.total == 0) continue;
    sum += score.accuracy();
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

UdrReport udr_check(const Corpus& parsed, const std::vector<UdrTarget>& targets,
                    const SupertagCatalog& catalog) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    const std::string id = parsed[k].id();
    if (id.empty()) throw Error("parsed sentence " + std::to_string(k + 1) + " has no '# id' line");
    if (!by_id.emplace(id, k).second) throw Error("duplicate sentence id '" + id + "'");
  }
  std::unordered_map<std::string, DepGraph> graphs;
  UdrReport report;
  for (auto c : kConstructions) report.by_construction[std::string(c)];
  for (const UdrTarget& t : targets) {
    auto it = by_id.find(t.sentence_id);
    if (it == by_id.end()) {
      throw Error("target sentence id '" + t.sentence_id + "' not found in the parsed corpus");
    }
    auto g = graphs.find(t.sentence_id);
    if (g == graphs.end()) {
      DepGraph graph = DepGraph::from_sentence(parsed[it->second]);
      const RuleTrace trace = apply_udr_pipeline(graph, catalog);
      report.traces.emplace_back(t.sentence_id, format_trace(graph, trace));
      g = graphs.emplace(t.sentence_id, std::move(graph)).first;
    }
    UdrOutcome o{t, convert_udr_label(t, g->second), false};
    o.found = contains_arc(g->second, t.child, t.parent, o.tag_label);
    ConstructionScore& score = report.by_construction[t.construction];
    ++score.total;
    ++report.total;
    score.found += o.found;
    report.found += o.found;
    report.outcomes.push_back(std::move(o));
  }
  return report;
}

void write_udr_table(std::ostream& out, const UdrReport& report) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(1);
  for (auto c : kConstructions) out << c << '\t';
  out << "Total\tAvg\n";
  for (auto c : kConstructions) {
    const ConstructionScore& s = report.by_construction.at(std::string(c));
    if (s.total == 0) {
      out << "-\t";
    } else {
      out << s.accuracy() << '\t';
    }
  }
  out << report.total_accuracy() << '\t' << report.average_accuracy() << '\n';
  out.flags(flags);
}

}  // namespace graphtag
