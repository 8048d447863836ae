#include "graphtag/synthetic.hpp"

#include <array>
#include <string>
#include <vector>

#include "graphtag/rng.hpp"

namespace graphtag {

namespace {

struct Builder {
  Sentence s;

  int add(std::string form, std::string pos, std::string stag) {
    Token t;
    t.form = std::move(form);
    t.gold_pos = std::move(pos);
    t.supertag = std::move(stag);
    s.tokens.push_back(std::move(t));
    return static_cast<int>(s.tokens.size());
  }
  void attach(int child, int head, std::string rel) {
    s.tokens[child - 1].head = head;
    s.tokens[child - 1].rel = std::move(rel);
  }
};

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& words) {
  return words[rng.below(N)];
}

constexpr std::array<const char*, 8> kNouns{"dog", "cat", "man", "woman", "girl", "boy",
                                            "farmer", "child"};
// Nouns that make a prepositional phrase attach to the verb ("with a stick")
// and ones that make it attach to the noun ("with a hat").
constexpr std::array<const char*, 5> kInstruments{"stick", "telescope", "hammer", "spoon", "rope"};
constexpr std::array<const char*, 5> kAttributes{"hat", "scarf", "bone", "collar", "ribbon"};
constexpr std::array<const char*, 4> kDets{"the", "a", "every", "some"};
constexpr std::array<const char*, 6> kAdjs{"old", "small", "happy", "red", "tall", "quiet"};
constexpr std::array<const char*, 5> kIntrans{"sleeps", "laughs", "waits", "smiles", "falls"};
constexpr std::array<const char*, 6> kTrans{"sees", "finds", "pushes", "likes", "watches",
                                            "follows"};
constexpr std::array<const char*, 3> kPreps{"with", "near", "beside"};
constexpr std::array<const char*, 3> kAdverbs{"quickly", "often", "quietly"};

// Returns the noun's index; the determiner and adjective adjoin to it.
int noun_phrase(Builder& b, Rng& rng, const char* noun, bool object_position) {
  const int det = b.add(pick(rng, kDets), "DT", "t3");
  int adj = 0;
  if (rng.bernoulli(0.3)) adj = b.add(pick(rng, kAdjs), "JJ", "t4");
  const int n = b.add(noun, "NN", object_position ? "t1" : "t2");
  b.attach(det, n, "adj");
  if (adj) b.attach(adj, n, "adj");
  return n;
}

}  // namespace

Corpus synthetic_corpus(std::size_t sentences, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t k = 0; k < sentences; ++k) {
    Builder b;
    b.s.set_id("syn-" + std::to_string(k + 1));
    const int subj = noun_phrase(b, rng, pick(rng, kNouns), false);
    int adv = 0;
    if (rng.bernoulli(0.2)) adv = b.add(pick(rng, kAdverbs), "RB", "t5");
    const bool transitive = rng.bernoulli(0.6);
    const int verb = transitive ? b.add(pick(rng, kTrans), "VBZ", "t27")
                                : b.add(pick(rng, kIntrans), "VBZ", "t28");
    b.attach(verb, 0, "ROOT");
    b.attach(subj, verb, "0");
    if (adv) b.attach(adv, verb, "adj");
    int last_noun = 0;
    if (transitive) {
      last_noun = noun_phrase(b, rng, pick(rng, kNouns), true);
      b.attach(last_noun, verb, "1");
    }
    if (rng.bernoulli(0.6)) {
      // Verb attachment needs an instrument; noun attachment needs a noun to
      // the left inside the verb phrase.
      const bool to_noun = last_noun != 0 && rng.bernoulli(0.5);
      const int prep = b.add(pick(rng, kPreps), "IN", to_noun ? "t6" : "t7");
      const int pobj =
          noun_phrase(b, rng, to_noun ? pick(rng, kAttributes) : pick(rng, kInstruments), true);
      b.attach(prep, to_noun ? last_noun : verb, "adj");
      b.attach(pobj, prep, "1");
    }
    const int stop = b.add(".", ".", "t0");
    b.attach(stop, verb, "adj");
    corpus.push_back(std::move(b.s));
  }
  return corpus;
}

}  // namespace graphtag
