#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garboost/feature_hasher.hpp"
#include "garboost/vecmath.hpp"

namespace garboost {

// Pair features psi(q, h): the elementwise product of the two hashed feature
// vectors, pushed through a fixed seeded Rademacher projection to psi_dim.
// The projection entries are derived by hashing (seed, row, bucket), so the
// map is deterministic and never materialized.
class PairFeaturizer {
 public:
  PairFeaturizer(uint32_t psi_dim, uint32_t feature_dim, uint64_t projection_seed);

  Vec pair_features(const SparseVector& query_features,
                    const SparseVector& candidate_features) const;

  uint32_t psi_dim() const { return psi_dim_; }
  uint64_t projection_seed() const { return seed_; }

 private:
  uint32_t psi_dim_;
  uint32_t feature_dim_;
  uint64_t seed_;
};

struct PoolCandidate {
  std::string text;
  Vec psi;  // pair features against the pool's query
};

// Fixed, ordered candidate space for one query (Eq-1 sampling happens here).
struct CandidatePool {
  std::string query_id;
  std::string query_text;
  std::vector<PoolCandidate> candidates;

  size_t size() const { return candidates.size(); }
  // Index of the first candidate with this exact text, or -1.
  int find(const std::string& text) const;
};

// Linear softmax selection policy over a candidate pool, with a frozen
// reference copy for DPO.
class ToyPolicy {
 public:
  explicit ToyPolicy(uint32_t psi_dim);

  // log pi(candidate | query) = log softmax(theta . psi)_candidate
  double logprob(const CandidatePool& pool, size_t candidate_index) const;
  double logprob_ref(const CandidatePool& pool, size_t candidate_index) const;

  // Log-probabilities for the whole pool, in candidate order.
  Vec logprobs(const CandidatePool& pool) const;
  Vec logprobs_ref(const CandidatePool& pool) const;

  // d log pi(candidate)/d theta = psi_candidate - E_pi[psi]
  Vec logprob_grad(const CandidatePool& pool, size_t candidate_index) const;

  // K draws with replacement from softmax(theta . psi); deterministic by seed.
  std::vector<size_t> sample(const CandidatePool& pool, size_t k, uint64_t seed) const;

  void freeze_reference();  // theta_ref <- theta

  const Vec& theta() const { return theta_; }
  Vec& mutable_theta() { return theta_; }
  const Vec& theta_ref() const { return theta_ref_; }
  void set_theta(Vec t);
  void set_theta_ref(Vec t);
  uint32_t psi_dim() const { return static_cast<uint32_t>(theta_.size()); }

 private:
  static Vec log_softmax(const Vec& scores);
  Vec scores(const CandidatePool& pool, const Vec& params) const;

  Vec theta_;
  Vec theta_ref_;
};

}  // namespace garboost
