#pragma once

#include <map>
#include <memory>
#include <string>

#include "garboost/backend.hpp"
#include "garboost/corpus.hpp"
#include "garboost/toy_embedder.hpp"
#include "garboost/toy_policy.hpp"

namespace garboost {

struct ToyBackendConfig {
  ToyEmbedderConfig embedder;
  uint32_t psi_dim = 256;
  uint64_t projection_seed = 99;
  size_t pool_passages = 32;    // top-P corpus passages per query pool
  double judge_threshold = 0.5;  // idf-weighted overlap cutoff for the judge
};

// In-process backend: a trainable linear embedder plus a trainable selection
// policy over per-query candidate pools, with lexical stand-ins for the
// judging and ranking calls. Every operation is a pure deterministic function
// of (params, inputs, seed).
class ToyBackend {
 public:
  ToyBackend(ToyBackendConfig cfg, const Corpus& corpus);

  Retriever& retriever() { return *retriever_; }
  Generator& generator() { return *generator_; }

  ToyEmbedder& embedder() { return embedder_; }
  const ToyEmbedder& embedder() const { return embedder_; }
  ToyPolicy& policy() { return policy_; }
  const ToyPolicy& policy() const { return policy_; }
  const IdfTable& idf() const { return idf_; }
  const PairFeaturizer& pair_featurizer() const { return pair_featurizer_; }
  const ToyBackendConfig& config() const { return cfg_; }
  const Corpus& corpus() const { return *corpus_; }

  // Candidate pool for a query: the top pool_passages corpus passages by
  // idf^2-weighted lexical overlap, followed by 4 template paraphrases of the
  // query. Built once per query text and memoized.
  const CandidatePool& pool(const std::string& query_text);

 private:
  class ToyRetrieverImpl;
  class ToyGeneratorImpl;

  ToyBackendConfig cfg_;
  const Corpus* corpus_;
  ToyEmbedder embedder_;
  ToyPolicy policy_;
  PairFeaturizer pair_featurizer_;
  IdfTable idf_;
  std::map<std::string, CandidatePool> pools_;
  std::unique_ptr<Retriever> retriever_;
  std::unique_ptr<Generator> generator_;
};

}  // namespace garboost
