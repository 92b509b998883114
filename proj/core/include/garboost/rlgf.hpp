#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "garboost/backend.hpp"
#include "garboost/corpus.hpp"
#include "garboost/dense_index.hpp"
#include "garboost/toy_embedder.hpp"
#include "garboost/vecmath.hpp"

namespace garboost {

struct RlgfConfig {
  double alpha0 = 0.5;  // proximity weight on the gold document term
  double alphai = 0.5;  // proximity weight per hypothetical term
  double tau = 0.05;    // softmax temperature (tau = 1 is the literal formula)
  double lambda_dst = 1.0;
  double learning_rate = 2.0;
  size_t epochs = 20;
  size_t negatives_per_query = 5;  // m mined per query
  size_t neg_window_lo = 30;       // mining window [a, b], 1-based ranks
  size_t neg_window_hi = 100;
  size_t rank_list_size = 10;  // N for the ranking feedback
  bool proximity = true;       // hypotheticals anchor to the query
  bool distillation = true;    // include the listwise loss
};

enum class RankSource { kGenerator, kFallbackRetriever };

struct RankedList {
  std::string query_id;
  std::vector<std::string> doc_ids;  // permutation of the candidate set
  RankSource source = RankSource::kGenerator;
};

struct TrainExample {
  std::string query_id;
  std::string query_text;
  ScoredDoc dstar;                      // gold document (id + text)
  std::vector<std::string> hyp_texts;   // deduplicated hypothetical docs
  std::vector<ScoredDoc> negatives;     // mined hard negatives
  std::vector<ScoredDoc> ranked;        // generator ranking, best first (may be empty)
};

// rho = alpha0 * v_q.v_d + sum_i alphai * v_q.v_hi
double proximity_score(const Vec& query_vector, const Vec& doc_vector,
                       const std::vector<Vec>& hyp_vectors, double alpha0,
                       double alphai);

// alpha0 * v_q.v_d + sum_i alphai * v_hi.v_d (the pre-proximity decomposition)
double basic_objective_score(const Vec& query_vector, const Vec& doc_vector,
                             const std::vector<Vec>& hyp_vectors, double alpha0,
                             double alphai);

// L = -sum_{p in positives} log softmax over {p} + negatives of (v_q.v_p / tau),
// log-sum-exp stabilized. Requires at least one positive.
double contrastive_loss(const Vec& query_vector, const std::vector<Vec>& positives,
                        const std::vector<Vec>& negatives, double tau);

// Plackett-Luce list likelihood over the ranked vectors:
// L = -(1/N) sum_k log softmax over the suffix {k..N} of (v_q.v_dk / tau).
// Exactly 0 for N = 1.
double distillation_loss(const Vec& query_vector, const std::vector<Vec>& ranked,
                         double tau);

// "Query: {q}. Doc [1]: {d_1}, Doc [2]: {d_2}, ... Rank these documents based
// on their relevance to the query."
std::string build_ranking_prompt(const std::string& query,
                                 const std::vector<std::string>& doc_texts);

// Candidate set = top-(N-1) retrieved docs for the raw query plus the gold
// doc, deduplicated; the generator orders them. A RankParseError from the
// backend falls back to retriever order with source = kFallbackRetriever.
RankedList collect_ranking_feedback(Generator& generator,
                                    const std::string& query_id,
                                    const std::string& query_text,
                                    const DenseIndex& index, Retriever& retriever,
                                    const Document& dstar, const Corpus& corpus,
                                    size_t n);

struct RlgfTraceRow {
  size_t epoch = 0;
  double loss_ctr = 0.0;
  double loss_dst = 0.0;
  double lr = 0.0;
};

struct TrainRetrieverResult {
  std::vector<RlgfTraceRow> trace;  // trace[0] holds the pre-training losses
  size_t skipped_examples = 0;
};

// Full-batch gradient descent on mean(L_ctr + lambda_dst * L_dst) over the
// examples, with gradients hand-derived through featurize -> project ->
// normalize -> score. In-batch negatives (the other examples' gold docs) are
// appended to each example's mined negatives, minus any text that appears
// among its positives.
TrainRetrieverResult train_retriever(ToyEmbedder& embedder,
                                     const std::vector<TrainExample>& examples,
                                     const RlgfConfig& cfg);

enum class RlgfLossKind { kContrastive, kDistillation, kCombined };

// Batch objective shared by the trainer and the gradient checker. Returns the
// loss; when grad_w is non-null it must be zero-initialized to the weight
// size and receives dLoss/dW.
double rlgf_batch_loss(const ToyEmbedder& embedder,
                       const std::vector<TrainExample>& examples,
                       const RlgfConfig& cfg, RlgfLossKind kind, Vec* grad_w,
                       double* loss_ctr_out = nullptr,
                       double* loss_dst_out = nullptr,
                       size_t* skipped_out = nullptr);

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t coords_checked = 0;
};

// Central-difference check of rlgf_batch_loss over every W coordinate touched
// by the fixture (rows = feature buckets of the involved texts). Relative
// error uses |a - fd| / max(|a|, |fd|, 1e-4), i.e. an absolute floor of 1e-8
// for near-zero coordinates.
GradCheckResult check_gradients(ToyEmbedder& embedder,
                                const std::vector<TrainExample>& examples,
                                const RlgfConfig& cfg, RlgfLossKind kind,
                                double h);

}  // namespace garboost
