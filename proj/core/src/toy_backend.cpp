#include "garboost/toy_backend.hpp"

#include <algorithm>
#include <set>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

class ToyBackend::ToyRetrieverImpl : public Retriever {
 public:
  explicit ToyRetrieverImpl(ToyBackend& owner) : owner_(owner) {}

  EmbedBatchResult embed_batch(const std::vector<std::string>& texts) override {
    EmbedBatchResult out;
    out.rows.reserve(texts.size());
    out.zero_flags.reserve(texts.size());
    for (const auto& t : texts) {
      auto r = owner_.embedder_.embed(t);
      out.rows.push_back(std::move(r.vector));
      out.zero_flags.push_back(r.is_zero);
    }
    return out;
  }

  uint32_t dim() const override { return owner_.embedder_.dim(); }
  bool normalized() const override { return owner_.embedder_.normalize(); }
  uint64_t fingerprint() const override { return owner_.embedder_.fingerprint(); }

 private:
  ToyBackend& owner_;
};

class ToyBackend::ToyGeneratorImpl : public Generator {
 public:
  explicit ToyGeneratorImpl(ToyBackend& owner) : owner_(owner) {}

  GeneratorCapabilities capabilities() const override {
    GeneratorCapabilities caps;
    caps.logprobs = true;  // the toy policy always exposes likelihoods
    return caps;
  }

  HypotheticalBatch generate_hypothetical(const std::string& query,
                                          const std::string& task, size_t k,
                                          uint64_t seed) override {
    (void)task;  // the toy pool already encodes the corpus context
    HypotheticalBatch batch;
    batch.requested = k;
    if (k == 0) return batch;
    const CandidatePool& pool = owner_.pool(query);
    for (size_t idx : owner_.policy_.sample(pool, k, seed)) {
      batch.texts.push_back(pool.candidates[idx].text);
    }
    return batch;
  }

  std::string synthesize_query(const Document& doc,
                               const std::string& task) override {
    (void)task;
    return extract_query(doc.text, owner_.idf_, fnv1a64(doc.id));
  }

  bool judge_pair(const std::string& task, const std::string& query,
                  const std::string& doc_text) override {
    (void)task;
    return overlap_judge(query, doc_text, owner_.idf_, owner_.cfg_.judge_threshold);
  }

 protected:
  std::vector<std::string> rank_docs_impl(
      const std::string& query, const std::vector<ScoredDoc>& docs) override {
    if (docs.empty()) throw Error("rank_docs: empty document list");
    return lexical_rank_oracle(query, docs, owner_.idf_);
  }

 private:
  ToyBackend& owner_;
};

ToyBackend::ToyBackend(ToyBackendConfig cfg, const Corpus& corpus)
    : cfg_(cfg),
      corpus_(&corpus),
      embedder_(cfg.embedder),
      policy_(cfg.psi_dim),
      pair_featurizer_(cfg.psi_dim, cfg.embedder.hasher.dim, cfg.projection_seed) {
  for (const auto& d : corpus.docs) idf_.add_document(d.embedding_text());
  idf_.finalize();
  retriever_ = std::make_unique<ToyRetrieverImpl>(*this);
  generator_ = std::make_unique<ToyGeneratorImpl>(*this);
}

const CandidatePool& ToyBackend::pool(const std::string& query_text) {
  auto it = pools_.find(query_text);
  if (it != pools_.end()) return it->second;

  CandidatePool pool;
  pool.query_id = query_text;
  pool.query_text = query_text;

  // Top pool_passages corpus docs by idf^2-weighted unique-token overlap.
  std::set<std::string> q_tokens;
  for (auto& t : tokenize(query_text)) q_tokens.insert(std::move(t));
  std::vector<std::pair<double, size_t>> scored;
  scored.reserve(corpus_->docs.size());
  for (size_t i = 0; i < corpus_->docs.size(); ++i) {
    double score = 0.0;
    std::set<std::string> seen;
    for (auto& t : tokenize(corpus_->docs[i].embedding_text())) {
      if (q_tokens.count(t) && seen.insert(t).second) {
        const double w = idf_.idf(t);
        score += w * w;
      }
    }
    scored.emplace_back(score, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return corpus_->docs[a.second].id < corpus_->docs[b.second].id;
  });

  const SparseVector q_features = embedder_.hasher().featurize(query_text);
  auto add_candidate = [&](std::string text) {
    PoolCandidate c;
    c.psi = pair_featurizer_.pair_features(q_features,
                                           embedder_.hasher().featurize(text));
    c.text = std::move(text);
    pool.candidates.push_back(std::move(c));
  };

  const size_t n_pass = std::min(cfg_.pool_passages, scored.size());
  for (size_t r = 0; r < n_pass; ++r) {
    add_candidate(corpus_->docs[scored[r].second].embedding_text());
  }
  add_candidate(query_text);
  add_candidate("About " + query_text + ".");
  add_candidate("Details about " + query_text + ".");
  add_candidate("Summary of " + query_text + ".");

  auto [pos, inserted] = pools_.emplace(query_text, std::move(pool));
  (void)inserted;
  return pos->second;
}

}  // namespace garboost
