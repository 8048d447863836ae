#include "graphtag/analogy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace graphtag {

namespace {

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

std::span<const double> row(const Tensor& t, int id) {
  return t.data().subspan(static_cast<std::size_t>(id) * t.cols(), t.cols());
}

}  // namespace

AnalogyResult analogy_eval(const Tensor& embeddings, std::span<const AnalogyEquation> equations,
                           std::span<const int> candidates) {
  if (embeddings.rank() != 2) throw ShapeError("analogy_eval expects an embedding matrix");
  const std::unordered_set<int> pool(candidates.begin(), candidates.end());
  for (int c : candidates) {
    if (c < 0 || static_cast<std::size_t>(c) >= embeddings.rows()) {
      throw Error("analogy candidate id " + std::to_string(c) + " has no embedding row");
    }
  }
  const std::size_t dim = embeddings.cols();
  std::vector<double> norms(embeddings.rows(), 0.0);
  for (int c : candidates) norms[c] = norm(row(embeddings, c));

  AnalogyResult result;
  bool warned_zero = false;
  for (const AnalogyEquation& eq : equations) {
    for (int id : {eq.a, eq.b, eq.c, eq.d}) {
      if (!pool.count(id)) {
        throw Error("analogy id " + std::to_string(id) + " is not in the candidate set");
      }
    }
    if (eq.d == eq.a || eq.d == eq.b || eq.d == eq.c) {
      throw Error("analogy answer must differ from the query terms");
    }
    std::vector<double> q(dim);
    const auto va = row(embeddings, eq.a), vb = row(embeddings, eq.b), vc = row(embeddings, eq.c);
    for (std::size_t k = 0; k < dim; ++k) q[k] = va[k] - vb[k] + vc[k];
    const double qn = norm(q);
    if (qn == 0.0) result.warnings.push_back("zero query vector; ranking falls back to ids");

    struct Scored {
      int id;
      bool zero;
      double sim;
    };
    std::vector<Scored> ranked;
    for (int c : candidates) {
      if (c == eq.a || c == eq.b || c == eq.c) continue;
      const bool zero = norms[c] == 0.0;
      double sim = 0.0;
      if (!zero && qn > 0.0) {
        const auto v = row(embeddings, c);
        sim = std::inner_product(v.begin(), v.end(), q.begin(), 0.0) / (norms[c] * qn);
      }
      if (zero && !warned_zero) {
        result.warnings.push_back("candidate " + std::to_string(c) +
                                  " has a zero-norm embedding and ranks last");
        warned_zero = true;
      }
      ranked.push_back({c, zero, sim});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Scored& x, const Scored& y) {
      if (x.zero != y.zero) return !x.zero;
      if (x.sim != y.sim) return x.sim > y.sim;
      return x.id < y.id;
    });
    const auto it =
        std::find_if(ranked.begin(), ranked.end(), [&](const Scored& s) { return s.id == eq.d; });
    result.ranks.push_back(static_cast<std::size_t>(it - ranked.begin()) + 1);
  }
  if (!result.ranks.empty()) {
    const auto hits = std::count(result.ranks.begin(), result.ranks.end(), std::size_t{1});
    result.percent_correct = 100.0 * static_cast<double>(hits) / result.ranks.size();
    result.average_rank =
        static_cast<double>(std::accumulate(result.ranks.begin(), result.ranks.end(), std::size_t{0})) /
        result.ranks.size();
  }
  return result;
}

std::vector<int> most_frequent(std::span<const std::size_t> counts, std::size_t k) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) ids.push_back(static_cast<int>(i));
  }
  std::stable_sort(ids.begin(), ids.end(), [&](int x, int y) { return counts[x] > counts[y]; });
  if (ids.size() > k) ids.resize(k);
  return ids;
}

std::vector<std::size_t> supertag_counts(const Corpus& corpus, const Vocabulary& vocab) {
  std::vector<std::size_t> counts(vocab.stags.size(), 0);
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) {
      if (auto id = vocab.stags.find(t.supertag)) ++counts[*id];
    }
  }
  return counts;
}

std::vector<AnalogyEquation> read_equations(const std::filesystem::path& path,
                                            const SymbolTable& stags) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open equation file " + path.string());
  std::vector<AnalogyEquation> eqs;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string names[4];
    std::string extra;
    if (!(fields >> names[0] >> names[1] >> names[2] >> names[3]) || (fields >> extra)) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected four supertags");
    }
    int ids[4];
    for (int k = 0; k < 4; ++k) {
      auto id = stags.find(names[k]);
      if (!id) {
        throw Error(path.string() + ":" + std::to_string(lineno) + ": unknown supertag '" +
                    names[k] + "'");
      }
      ids[k] = *id;
    }
    eqs.push_back({ids[0], ids[1], ids[2], ids[3]});
  }
  return eqs;
}

ConstructedAnalogies constructed_analogies(std::size_t count, std::size_t distractors, Rng& rng) {
  // Equation k uses basis vectors p, q, s, t:
  //   a = p + s, b = p + t, c = q + t, d = q + s.
  const std::size_t dim = 4 * count + distractors;
  const std::size_t rows = 4 * count + distractors;
  std::vector<std::size_t> basis(dim);
  std::iota(basis.begin(), basis.end(), 0);
  rng.shuffle(basis);
  ConstructedAnalogies out{Tensor(Shape{rows, dim}), {}, {}};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t p = basis[4 * k], q = basis[4 * k + 1], s = basis[4 * k + 2],
                      t = basis[4 * k + 3];
    const int a = static_cast<int>(4 * k);
    out.embeddings.at(a, p) = out.embeddings.at(a, s) = 1.0;
    out.embeddings.at(a + 1, p) = out.embeddings.at(a + 1, t) = 1.0;
    out.embeddings.at(a + 2, q) = out.embeddings.at(a + 2, t) = 1.0;
    out.embeddings.at(a + 3, q) = out.embeddings.at(a + 3, s) = 1.0;
    out.equations.push_back({a, a + 1, a + 2, a + 3});
  }
  for (std::size_t k = 0; k < distractors; ++k) {
    out.embeddings.at(4 * count + k, basis[4 * count + k]) = 1.0;
  }
  out.candidates.resize(rows);
  std::iota(out.candidates.begin(), out.candidates.end(), 0);
  return out;
}

}  // namespace graphtag
