#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "garboost/backend.hpp"
#include "garboost/toy_policy.hpp"

namespace garboost {

// Winning/losing hypothetical documents with the retriever scores that
// selected them; the unit of generator training and of the pair export.
struct PreferencePair {
  std::string query_id;
  std::string query_text;
  std::string winning_text;   // h_w
  std::string losing_text;    // h_l
  double score_win = 0.0;     // s_w
  double score_lose = 0.0;    // s_l
  double score_query = 0.0;   // s_q = v_q . v_dstar
  double gamma = 0.0;         // filter factor in force when accepted
};

enum class PolicyObjective { kDpo, kSft };

struct DpoConfig {
  double beta = 0.1;
  double learning_rate = 0.05;
  size_t steps = 100;
  PolicyObjective objective = PolicyObjective::kDpo;
};

struct CandidateScore {
  size_t sample_index = 0;
  std::string text;
  double score = 0.0;  // s_{q,h} = (alpha v_q + (1-alpha) v_h) . v_dstar
};

struct HypotheticalScores {
  std::vector<CandidateScore> candidates;  // zero-embedding samples dropped
  double query_score = 0.0;                // s_q
  size_t dropped_zero = 0;
};

// Retriever feedback over a candidate set: per-candidate preference scores
// computed with the single-hypothetical combination at the given alpha.
HypotheticalScores score_hypotheticals(const std::string& query_text,
                                       const std::vector<std::string>& candidates,
                                       const std::string& dstar_text,
                                       Retriever& retriever, double alpha);

// Argmax/argmin by score, ties resolved toward the lowest sample index.
// Requires at least two scored candidates.
std::pair<CandidateScore, CandidateScore> select_extremes(
    const HypotheticalScores& scores);

struct FilterDecision {
  bool accepted = false;
  bool rule1_ok = false;  // s_w > s_q
  bool rule2_ok = false;  // s_w > gamma * s_l
  const char* reason = "";  // "rule-1" or "rule-2" when rejected
};

// Literal evaluation of both filtering rules; gamma must exceed 1.
FilterDecision apply_filter(double score_win, double score_lose,
                            double score_query, double gamma);

// -log sigmoid(beta * ((lp_w - lp_w_ref) - (lp_l - lp_l_ref))), evaluated via
// the numerically stable softplus form.
double dpo_loss(double lp_w, double lp_w_ref, double lp_l, double lp_l_ref,
                double beta);

double sft_loss(double lp_w);

struct TrainPolicyResult {
  std::vector<double> loss_trace;  // loss_trace[0] is the pre-training loss
};

using PoolMap = std::map<std::string, const CandidatePool*>;

// Full-batch gradient descent on the mean pair loss. The reference parameters
// are read, never written; freezing them is the caller's stage-boundary job.
TrainPolicyResult train_policy(ToyPolicy& policy,
                               const std::vector<PreferencePair>& pairs,
                               const PoolMap& pools, const DpoConfig& cfg);

// Line-delimited export for external preference-tuning pipelines:
// {"prompt": ..., "chosen": h_w, "rejected": h_l,
//  "meta": {"s_w":, "s_l":, "s_q":, "gamma":}}.
// The prompt is the hypothetical-document template with the task and query
// substituted. Returns the number of records written.
size_t export_pairs(const std::vector<PreferencePair>& pairs,
                    const std::string& task, const std::string& path);

std::vector<PreferencePair> import_pairs(const std::string& path);

}  // namespace garboost
