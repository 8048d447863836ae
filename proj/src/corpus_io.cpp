#include "graphtag/corpus_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace graphtag {

std::string Sentence::id() const {
  for (const std::string& c : comments) {
    std::string_view v(c);
    v.remove_prefix(1);
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    if (v.starts_with("id")) {
      v.remove_prefix(2);
      while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
      if (!v.empty() && v.front() == '=') {
        v.remove_prefix(1);
        while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
        return std::string(v);
      }
    }
  }
  return "";
}

void Sentence::set_id(const std::string& id) {
  for (std::string& c : comments) {
    Sentence probe;
    probe.comments = {c};
    if (!probe.id().empty()) {
      c = "# id = " + id;
      return;
    }
  }
  comments.insert(comments.begin(), "# id = " + id);
}

std::vector<int> heads_of(const Sentence& s) {
  std::vector<int> heads(s.size() + 1, -1);
  for (std::size_t i = 0; i < s.size(); ++i) heads[i + 1] = s.tokens[i].head;
  return heads;
}

CorpusFormatError::CorpusFormatError(const std::string& source, std::size_t line,
                                     const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

constexpr std::size_t kColumns = 7;

std::string field_or_empty(std::string_view v) { return v == "_" ? std::string() : std::string(v); }

std::string_view rstrip(std::string_view v) {
  while (!v.empty() && (v.back() == ' ' || v.back() == '\r' || v.back() == '\t')) v.remove_suffix(1);
  return v;
}

bool parse_int(std::string_view v, int& out) {
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Corpus read_corpus(std::istream& in, const std::string& source) {
  Corpus corpus;
  Sentence current;
  std::string raw;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.push_back(std::move(current));
    current = Sentence();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = rstrip(raw);
    if (line.empty()) {
      if (!current.comments.empty() && current.tokens.empty()) {
        throw CorpusFormatError(source, line_no, "comment block not followed by tokens");
      }
      flush();
      continue;
    }
    if (line.front() == '#') {
      if (!current.tokens.empty()) {
        throw CorpusFormatError(source, line_no, "comment line inside a sentence");
      }
      current.comments.emplace_back(line);
      continue;
    }
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                       : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (cols.size() != kColumns) {
      throw CorpusFormatError(source, line_no,
                              "expected " + std::to_string(kColumns) + " tab-separated columns, got " +
                                  std::to_string(cols.size()));
    }
    int index = 0;
    if (!parse_int(cols[0], index) || index != static_cast<int>(current.tokens.size()) + 1) {
      throw CorpusFormatError(source, line_no,
                              "token index '" + std::string(cols[0]) + "' should be " +
                                  std::to_string(current.tokens.size() + 1));
    }
    Token tok;
    if (cols[1].empty()) throw CorpusFormatError(source, line_no, "empty word form");
    tok.form = std::string(cols[1]);
    tok.gold_pos = field_or_empty(cols[2]);
    tok.pred_pos = field_or_empty(cols[3]);
    tok.supertag = field_or_empty(cols[4]);
    if (cols[5] != "_") {
      if (!parse_int(cols[5], tok.head) || tok.head < 0) {
        throw CorpusFormatError(source, line_no, "invalid head '" + std::string(cols[5]) + "'");
      }
    }
    tok.rel = field_or_empty(cols[6]);
    current.tokens.push_back(std::move(tok));
  }
  if (!current.comments.empty() && current.tokens.empty()) {
    throw CorpusFormatError(source, line_no, "comment block not followed by tokens");
  }
  flush();
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto n = static_cast<int>(corpus[s].size());
    for (const Token& t : corpus[s].tokens) {
      if (t.head > n) {
        throw CorpusFormatError(source, line_no,
                                "sentence " + std::to_string(s + 1) + " has head " +
                                    std::to_string(t.head) + " beyond its " + std::to_string(n) +
                                    " tokens");
      }
    }
  }
  return corpus;
}

Corpus read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus: " + path.string());
  return read_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  auto field = [](const std::string& v) -> const std::string& {
    static const std::string underscore = "_";
    return v.empty() ? underscore : v;
  };
  for (const Sentence& s : corpus) {
    for (const std::string& c : s.comments) out << c << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Token& t = s.tokens[i];
      out << (i + 1) << '\t' << t.form << '\t' << field(t.gold_pos) << '\t' << field(t.pred_pos)
          << '\t' << field(t.supertag) << '\t';
      if (t.head < 0) {
        out << '_';
      } else {
        out << t.head;
      }
      out << '\t' << field(t.rel) << '\n';
    }
    out << '\n';
  }
}

void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_corpus(out, corpus);
  if (!out) throw Error("failed writing corpus: " + path.string());
}

std::string format_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

}  // namespace graphtag
