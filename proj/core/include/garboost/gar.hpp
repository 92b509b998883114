#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "garboost/backend.hpp"
#include "garboost/dense_index.hpp"
#include "garboost/vecmath.hpp"

namespace garboost {

struct HypotheticalDoc {
  std::string query_id;
  std::string text;
  size_t sample_index = 0;
  std::optional<double> policy_logprob;
};

struct AugmentedQuery {
  std::string query_id;
  std::vector<double> weights;      // alpha_0 ... alpha_L
  Vec query_vector;                 // v_q
  std::vector<Vec> hyp_vectors;     // v_{h_1..L}
  Vec combined;                     // v'_q
};

// v'_q = alpha_0 * v_q + sum_i alpha_i * v_{h_i}. weights has one entry per
// component (query first); all positive, summing to 1 within 1e-9. The result
// is not re-normalized.
Vec combine_embeddings(const Vec& query_vector, const std::vector<Vec>& hyp_vectors,
                       const std::vector<double>& weights);

// Single-hypothetical shortcut: alpha * v_q + (1 - alpha) * v_h, 0 < alpha < 1.
Vec simplified_combine(const Vec& query_vector, const Vec& hyp_vector, double alpha);

// s = v'_q . v_dstar, exact f64 inner product.
double preference_score(const Vec& combined_query, const Vec& dstar_vector);

struct GarRetrieveConfig {
  size_t num_hypothetical = 4;  // L; 0 means plain retrieval
  double alpha0 = 0.8;          // query weight; remainder split over the L docs
  size_t k = 10;
  uint64_t seed = 0;
  std::string task;             // task description for the generation prompt
};

// Inference weights: alpha_0 for the query, (1 - alpha_0)/L per hypothetical.
std::vector<double> inference_weights(double alpha0, size_t num_hypothetical);

struct GarRetrieveResult {
  std::vector<SearchHit> hits;
  AugmentedQuery augmented;
  std::vector<HypotheticalDoc> hypotheticals;
};

// End-to-end generation-augmented retrieval: embed the query, sample L
// hypothetical documents, combine and search. Zero-embedding hypotheticals
// are dropped (weights renormalized over the survivors).
GarRetrieveResult gar_retrieve(const std::string& query_id,
                               const std::string& query_text,
                               const DenseIndex& index, Retriever& retriever,
                               Generator& generator, const GarRetrieveConfig& cfg);

}  // namespace garboost
