#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "garboost/corpus.hpp"
#include "garboost/dense_index.hpp"

namespace garboost {

enum class GainKind { kExponential, kLinear };  // gain(r) = 2^r - 1 or r

// nDCG@k with discount log2(i + 1). Returns 0 when the query has no relevant
// documents; callers decide whether such queries enter the macro average.
double ndcg_at_k(const std::vector<std::string>& ranking,
                 const std::map<std::string, int>& judgments, size_t k,
                 GainKind gain = GainKind::kExponential);

// |relevant docs in the top k| / |relevant docs|; 0 when nothing is relevant.
double recall_at_k(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& judgments, size_t k);

struct MetricResult {
  std::string name;
  size_t k = 0;
  std::vector<std::pair<std::string, double>> per_query;  // query order preserved
  double macro_average = 0.0;
  size_t evaluated = 0;  // queries contributing to the average
  size_t excluded = 0;   // queries skipped for having no relevant docs
};

struct PerQueryRanking {
  std::string query_id;
  std::vector<SearchHit> hits;
};

struct EvalOptions {
  size_t k = 10;
  GainKind gain = GainKind::kExponential;
  bool exclude_queries_without_relevant = true;
};

struct EvalOutput {
  MetricResult ndcg;
  MetricResult recall;
  std::vector<PerQueryRanking> rankings;
};

// Runs retrieve_fn per query, scores the rankings against the qrels and
// macro-averages. Queries with no relevant documents are reported with value
// 0 and excluded from the averages unless configured otherwise.
EvalOutput evaluate_rankings(
    const std::vector<Query>& queries, const QrelSet& qrels,
    const std::function<std::vector<SearchHit>(const Query&)>& retrieve_fn,
    const EvalOptions& opts);

// Line-delimited persistence of per-query rankings:
// {"query_id": ..., "doc_ids": [...], "scores": [...]}
void save_rankings(const std::vector<PerQueryRanking>& rankings,
                   const std::string& path);
std::vector<PerQueryRanking> load_rankings(const std::string& path);

// Fixed-width comparison table of (stage label, held-out nDCG@10 in percent).
std::string stage_table(const std::vector<std::pair<std::string, double>>& rows);

}  // namespace garboost
