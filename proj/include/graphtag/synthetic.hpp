#pragma once

#include <cstddef>
#include <cstdint>

#include "graphtag/sentence.hpp"

namespace graphtag {

// Sentences from a small lexicalized grammar. Each token's supertag names
// its elementary tree, so supertags determine the argument frame of verbs and
// whether a preposition adjoins to the verb or to the preceding noun. The
// attachment is decided by the noun inside the prepositional phrase.
// Heads and relations form a derivation tree (0 subject, 1 object, adj
// adjunction, ROOT for the root arc).
Corpus synthetic_corpus(std::size_t sentences, std::uint64_t seed);

}  // namespace graphtag
