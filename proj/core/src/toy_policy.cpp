#include "garboost/toy_policy.hpp"

#include <algorithm>
#include <cmath>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

PairFeaturizer::PairFeaturizer(uint32_t psi_dim, uint32_t feature_dim,
                               uint64_t projection_seed)
    : psi_dim_(psi_dim), feature_dim_(feature_dim), seed_(projection_seed) {
  if (psi_dim_ == 0) throw ConfigError("pair featurizer: psi_dim must be > 0");
}

Vec PairFeaturizer::pair_features(const SparseVector& query_features,
                                  const SparseVector& candidate_features) const {
  Vec psi(psi_dim_, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(psi_dim_));
  auto a = query_features.entries.begin();
  auto b = candidate_features.entries.begin();
  while (a != query_features.entries.end() &&
         b != candidate_features.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      const double v = a->second * b->second;
      const uint64_t base = seed_ ^ (static_cast<uint64_t>(a->first) *
                                     static_cast<uint64_t>(psi_dim_));
      for (uint32_t j = 0; j < psi_dim_; ++j) {
        const double sign = (splitmix64(base + j) >> 63) ? 1.0 : -1.0;
        psi[j] += sign * v * scale;
      }
      ++a;
      ++b;
    }
  }
  return psi;
}

int CandidatePool::find(const std::string& text) const {
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].text == text) return static_cast<int>(i);
  }
  return -1;
}

ToyPolicy::ToyPolicy(uint32_t psi_dim)
    : theta_(psi_dim, 0.0), theta_ref_(psi_dim, 0.0) {}

Vec ToyPolicy::scores(const CandidatePool& pool, const Vec& params) const {
  if (pool.candidates.empty()) throw EmptyPool("policy: empty candidate pool");
  Vec s(pool.candidates.size());
  for (size_t i = 0; i < pool.candidates.size(); ++i) {
    s[i] = dot(params, pool.candidates[i].psi);
  }
  return s;
}

Vec ToyPolicy::log_softmax(const Vec& scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - m);
  const double lse = m + std::log(z);
  Vec out(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] - lse;
  return out;
}

Vec ToyPolicy::logprobs(const CandidatePool& pool) const {
  return log_softmax(scores(pool, theta_));
}

Vec ToyPolicy::logprobs_ref(const CandidatePool& pool) const {
  return log_softmax(scores(pool, theta_ref_));
}

double ToyPolicy::logprob(const CandidatePool& pool, size_t candidate_index) const {
  if (candidate_index >= pool.candidates.size()) {
    throw CandidateNotInPool("policy: candidate index out of range");
  }
  return logprobs(pool)[candidate_index];
}

double ToyPolicy::logprob_ref(const CandidatePool& pool, size_t candidate_index) const {
  if (candidate_index >= pool.candidates.size()) {
    throw CandidateNotInPool("policy: candidate index out of range");
  }
  return logprobs_ref(pool)[candidate_index];
}

Vec ToyPolicy::logprob_grad(const CandidatePool& pool, size_t candidate_index) const {
  if (candidate_index >= pool.candidates.size()) {
    throw CandidateNotInPool("policy: candidate index out of range");
  }
  const Vec lp = logprobs(pool);
  Vec grad = pool.candidates[candidate_index].psi;
  for (size_t i = 0; i < pool.candidates.size(); ++i) {
    axpy(-std::exp(lp[i]), pool.candidates[i].psi, grad);
  }
  return grad;
}

std::vector<size_t> ToyPolicy::sample(const CandidatePool& pool, size_t k,
                                      uint64_t seed) const {
  if (k == 0) return {};
  if (pool.candidates.empty()) throw EmptyPool("policy: empty candidate pool");
  const Vec lp = logprobs(pool);
  Vec cdf(lp.size());
  double acc = 0.0;
  for (size_t i = 0; i < lp.size(); ++i) {
    acc += std::exp(lp[i]);
    cdf[i] = acc;
  }
  Rng rng(seed);
  std::vector<size_t> picks;
  picks.reserve(k);
  for (size_t n = 0; n < k; ++n) {
    const double u = rng.next_double() * acc;
    size_t i = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (i >= cdf.size()) i = cdf.size() - 1;
    picks.push_back(i);
  }
  return picks;
}

void ToyPolicy::freeze_reference() { theta_ref_ = theta_; }

void ToyPolicy::set_theta(Vec t) {
  if (t.size() != theta_.size()) throw DimMismatch("policy: theta size mismatch");
  theta_ = std::move(t);
}

void ToyPolicy::set_theta_ref(Vec t) {
  if (t.size() != theta_ref_.size()) {
    throw DimMismatch("policy: theta_ref size mismatch");
  }
  theta_ref_ = std::move(t);
}

}  // namespace garboost
