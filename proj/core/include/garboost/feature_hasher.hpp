#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace garboost {

// Sparse feature vector: (bucket, weight) pairs sorted by bucket, buckets
// unique, weights L2-normalized unless the vector is empty.
struct SparseVector {
  std::vector<std::pair<uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }
  double dot(const SparseVector& other) const;
};

struct FeatureHasherConfig {
  uint32_t ngram_min = 3;
  uint32_t ngram_max = 5;
  uint32_t dim = 4096;  // bucket count (dim_D)
  uint64_t hash_seed = 0x5eedULL;
};

// Character n-gram hashing vectorizer. The text is lowercased and runs of
// whitespace are collapsed to single spaces, then every n-gram for
// n in [ngram_min, ngram_max] is counted into bucket
// fnv1a64(seed, ngram) % dim. Counts are L2-normalized.
class FeatureHasher {
 public:
  explicit FeatureHasher(FeatureHasherConfig cfg);

  SparseVector featurize(std::string_view text) const;

  const FeatureHasherConfig& config() const { return cfg_; }
  uint32_t dim() const { return cfg_.dim; }

 private:
  FeatureHasherConfig cfg_;
};

}  // namespace garboost
