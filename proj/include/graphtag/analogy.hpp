#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graphtag/rng.hpp"
#include "graphtag/tensor.hpp"
#include "graphtag/vocab.hpp"

namespace graphtag {

// Asserts v_a - v_b + v_c = v_d over embedding row ids.
struct AnalogyEquation {
  int a = 0;
  int b = 0;
  int c = 0;
  int d = 0;
};

struct AnalogyResult {
  double percent_correct = 0.0;
  double average_rank = 0.0;
  std::vector<std::size_t> ranks;  // 1-based rank of d per equation
  std::vector<std::string> warnings;
};

// Ranks candidates (minus a, b and c) by cosine similarity to
// v_a - v_b + v_c, ties broken by id. Zero-norm candidates rank last with a
// warning. Every equation id must be a candidate.
AnalogyResult analogy_eval(const Tensor& embeddings, std::span<const AnalogyEquation> equations,
                           std::span<const int> candidates);

// Ids of the k most frequent entries (ties to the smaller id), skipping ids
// with count zero.
std::vector<int> most_frequent(std::span<const std::size_t> counts, std::size_t k);

// Supertag counts indexed by vocabulary id.
std::vector<std::size_t> supertag_counts(const Corpus& corpus, const Vocabulary& vocab);

// Whitespace-separated "a b c d" supertag names per line; "#" lines skipped.
std::vector<AnalogyEquation> read_equations(const std::filesystem::path& path,
                                            const SymbolTable& stags);

struct ConstructedAnalogies {
  Tensor embeddings;
  std::vector<AnalogyEquation> equations;
  std::vector<int> candidates;
};

// Rows built from orthonormal basis vectors so every equation holds exactly
// and d is the unique nearest candidate.
ConstructedAnalogies constructed_analogies(std::size_t count, std::size_t distractors, Rng& rng);

}  // namespace graphtag
