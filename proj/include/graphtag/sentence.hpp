#pragma once

#include <string>
#include <vector>

namespace graphtag {

// One corpus row. Empty strings and head == -1 stand for "_" (absent).
struct Token {
  std::string form;
  std::string gold_pos;
  std::string pred_pos;
  std::string supertag;
  int head = -1;  // 0 = ROOT
  std::string rel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  // Raw "#" lines preceding the sentence, without the trailing newline.
  std::vector<std::string> comments;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  // Value of a "# id = X" comment, or "" when absent.
  std::string id() const;
  void set_id(const std::string& id);

  bool operator==(const Sentence&) const = default;
};

using Corpus = std::vector<Sentence>;

// 1-based heads of tokens 1..n (index 0 unused, set to -1).
std::vector<int> heads_of(const Sentence& s);

}  // namespace graphtag
