#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "graphtag/sentence.hpp"
#include "graphtag/tensor.hpp"

namespace graphtag {

class CorpusFormatError : public Error {
 public:
  CorpusFormatError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Tab-separated corpus: one token per line with columns
//   index  form  gold-POS  predicted-POS  supertag  head  relation
// "_" marks an absent value, a blank line ends a sentence, and "#" lines
// before a sentence are kept as comments ("# id = X" names the sentence).
Corpus read_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus read_corpus_file(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus);
std::string format_corpus(const Corpus& corpus);

}  // namespace graphtag
