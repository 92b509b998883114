#include "garboost/gar.hpp"

#include <cmath>

#include "garboost/error.hpp"

namespace garboost {

Vec combine_embeddings(const Vec& query_vector, const std::vector<Vec>& hyp_vectors,
                       const std::vector<double>& weights) {
  if (weights.size() != hyp_vectors.size() + 1) {
    throw WeightError("combine: expected " + std::to_string(hyp_vectors.size() + 1) +
                      " weights, got " + std::to_string(weights.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw WeightError("combine: weights must be strictly positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw WeightError("combine: weights sum to " + std::to_string(sum));
  }
  for (const auto& h : hyp_vectors) {
    if (h.size() != query_vector.size()) {
      throw DimMismatch("combine: component dimension mismatch");
    }
  }
  Vec out(query_vector.size(), 0.0);
  axpy(weights[0], query_vector, out);
  for (size_t i = 0; i < hyp_vectors.size(); ++i) {
    axpy(weights[i + 1], hyp_vectors[i], out);
  }
  return out;
}

Vec simplified_combine(const Vec& query_vector, const Vec& hyp_vector, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw WeightError("simplified_combine: alpha must lie in (0, 1)");
  }
  if (hyp_vector.size() != query_vector.size()) {
    throw DimMismatch("simplified_combine: dimension mismatch");
  }
  Vec out(query_vector.size(), 0.0);
  axpy(alpha, query_vector, out);
  axpy(1.0 - alpha, hyp_vector, out);
  return out;
}

double preference_score(const Vec& combined_query, const Vec& dstar_vector) {
  return dot(combined_query, dstar_vector);
}

std::vector<double> inference_weights(double alpha0, size_t num_hypothetical) {
  if (num_hypothetical == 0) return {1.0};
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw WeightError("inference weights: alpha0 must lie in (0, 1)");
  }
  std::vector<double> w(num_hypothetical + 1, (1.0 - alpha0) / num_hypothetical);
  w[0] = alpha0;
  return w;
}

GarRetrieveResult gar_retrieve(const std::string& query_id,
                               const std::string& query_text,
                               const DenseIndex& index, Retriever& retriever,
                               Generator& generator, const GarRetrieveConfig& cfg) {
  if (index.fingerprint() != retriever.fingerprint()) {
    throw FingerprintMismatch("gar_retrieve: index was built with different params");
  }

  GarRetrieveResult result;
  auto q = retriever.embed_one(query_text);
  result.augmented.query_id = query_id;
  result.augmented.query_vector = q.vector;

  if (cfg.num_hypothetical > 0) {
    auto batch = generator.generate_hypothetical(query_text, cfg.task,
                                                 cfg.num_hypothetical, cfg.seed);
    std::vector<std::string> texts = batch.texts;
    if (!texts.empty()) {
      auto embedded = retriever.embed_batch(texts);
      for (size_t i = 0; i < texts.size(); ++i) {
        if (embedded.zero_flags[i]) continue;  // degenerate sample, drop
        HypotheticalDoc h;
        h.query_id = query_id;
        h.text = texts[i];
        h.sample_index = i;
        result.hypotheticals.push_back(std::move(h));
        result.augmented.hyp_vectors.push_back(std::move(embedded.rows[i]));
      }
    }
  }

  result.augmented.weights =
      inference_weights(cfg.alpha0, result.augmented.hyp_vectors.size());
  result.augmented.combined = combine_embeddings(
      result.augmented.query_vector, result.augmented.hyp_vectors,
      result.augmented.weights);
  result.hits = index.search(result.augmented.combined, cfg.k);
  return result;
}

}  // namespace garboost
