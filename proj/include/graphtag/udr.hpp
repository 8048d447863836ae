#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "graphtag/treeops.hpp"

namespace graphtag {

inline constexpr std::array<std::string_view, 7> kConstructions{"ObRC", "ObRed", "SbRC", "Free",
                                                                 "ObQ",  "RNR",   "SbEm"};

// Stanford-style labels accepted in target files.
const std::vector<std::string_view>& udr_label_inventory();

struct UdrTarget {
  std::string sentence_id;
  std::string construction;
  int child = 0;
  int parent = 0;
  std::string label;  // before conversion
};

// nsubj, cop -> 0; dobj, pobj, obj2, nsubjpass -> 1; everything else -> adj.
// Arcs from a verb to a wh-adverb become adj, and in SbEm the subject of a
// causative-inchoative verb becomes its object.
std::string convert_udr_label(const UdrTarget& target, const DepGraph& graph);

// Lines "id<TAB>construction<TAB>child<TAB>parent<TAB>label"; "#" lines are
// comments.
std::vector<UdrTarget> read_udr_targets(std::istream& in, const std::string& source);
std::vector<UdrTarget> read_udr_targets(const std::filesystem::path& path);

struct UdrOutcome {
  UdrTarget target;
  std::string tag_label;
  bool found = false;
};

struct ConstructionScore {
  std::size_t total = 0;
  std::size_t found = 0;
  double accuracy() const { return total == 0 ? 0.0 : 100.0 * found / total; }
};

struct UdrReport {
  std::map<std::string, ConstructionScore> by_construction;
  std::size_t total = 0;
  std::size_t found = 0;
  std::vector<UdrOutcome> outcomes;
  std::vector<std::pair<std::string, std::string>> traces;  // sentence id, trace text

  double total_accuracy() const { return total == 0 ? 0.0 : 100.0 * found / total; }
  // Mean over constructions that have targets.
  double average_accuracy() const;
};

// Transforms each parsed sentence (matched by "# id") and checks its targets.
UdrReport udr_check(const Corpus& parsed, const std::vector<UdrTarget>& targets,
                    const SupertagCatalog& catalog = {});

// Header and one row in the column order of kConstructions, then Total and Avg.
void write_udr_table(std::ostream& out, const UdrReport& report);

}  // namespace graphtag
