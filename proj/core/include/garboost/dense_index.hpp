#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garboost/backend.hpp"
#include "garboost/corpus.hpp"
#include "garboost/vecmath.hpp"

namespace garboost {

struct SearchHit {
  std::string doc_id;
  double score = 0.0;
};

// Exact inner-product index over a document collection. One f64 row per doc,
// in corpus order. No approximation anywhere: search results agree with a
// brute-force scan by construction. Hits are ordered by descending score,
// ties by ascending doc id.
class DenseIndex {
 public:
  DenseIndex() = default;

  static DenseIndex build(const Corpus& corpus, Retriever& retriever,
                          size_t batch_size = 64);

  std::vector<SearchHit> search(const Vec& query_vector, size_t k) const;

  // m ids drawn uniformly (seeded, without replacement) from retrieval ranks
  // [a, b] (1-based, inclusive) after dropping exclude_ids; the window is
  // clipped to the remaining corpus. May return fewer than m ids.
  std::vector<std::string> mine_hard_negatives(
      const Vec& query_vector, const std::vector<std::string>& exclude_ids,
      size_t rank_lo, size_t rank_hi, size_t m, uint64_t seed) const;

  size_t size() const { return ids_.size(); }
  uint32_t dim() const { return dim_; }
  uint64_t fingerprint() const { return fingerprint_; }
  const std::vector<std::string>& ids() const { return ids_; }
  // Ids whose documents embedded to the zero vector (indexed as zero rows).
  const std::vector<std::string>& zero_rows() const { return zero_rows_; }

  Vec row(size_t i) const;
  bool contains(const std::string& doc_id) const;
  const std::vector<double>& matrix() const { return matrix_; }

  // Persisted as header (magic, version, dim, N, fingerprint), an id table,
  // then the row-major matrix in f32. In-memory scoring stays f64.
  void save(const std::string& path) const;
  static DenseIndex load(const std::string& path);

 private:
  std::vector<std::string> ids_;
  std::vector<double> matrix_;  // row-major, ids_.size() x dim_
  uint32_t dim_ = 0;
  uint64_t fingerprint_ = 0;
  std::vector<std::string> zero_rows_;
};

}  // namespace garboost
