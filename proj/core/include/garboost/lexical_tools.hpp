#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garboost/text.hpp"

namespace garboost {

struct ScoredDoc {
  std::string id;
  std::string text;
};

// Deterministic ranking stand-in for a generator's re-ranking call:
//   score(d) = sum over shared unique tokens t of idf(t)^2
// sorted descending, ties by ascending doc id. Returns a permutation of the
// input ids.
std::vector<std::string> lexical_rank_oracle(const std::string& query,
                                             const std::vector<ScoredDoc>& docs,
                                             const IdfTable& idf);

// Toy query synthesis: sentences are ranked by summed token idf; the best
// sentence whose stopword-stripped tokens are non-empty yields the query,
// truncated to at most 10 tokens. Throws NoExtractableQuery when every
// candidate sentence strips to nothing. The seed is accepted for interface
// parity and recorded use; the extraction itself is a pure function of
// (doc_text, idf).
std::string extract_query(const std::string& doc_text, const IdfTable& idf,
                          uint64_t seed);

// Relevance verdict used by the toy judge: idf-weighted unique-token overlap
//   sum_{t in q and d} idf(t) / sum_{t in q} idf(t)  >=  threshold
bool overlap_judge(const std::string& query, const std::string& doc_text,
                   const IdfTable& idf, double threshold);

}  // namespace garboost
