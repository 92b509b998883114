#include "garboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"

namespace garboost {

using nlohmann::json;

namespace {

double gain_value(int grade, GainKind gain) {
  if (grade <= 0) return 0.0;
  if (gain == GainKind::kLinear) return static_cast<double>(grade);
  return std::exp2(static_cast<double>(grade)) - 1.0;
}

bool has_relevant(const std::map<std::string, int>& judgments) {
  for (const auto& [id, grade] : judgments) {
    if (grade > 0) return true;
  }
  return false;
}

}  // namespace

double ndcg_at_k(const std::vector<std::string>& ranking,
                 const std::map<std::string, int>& judgments, size_t k,
                 GainKind gain) {
  if (k < 1) throw Error("ndcg_at_k: k must be >= 1");
  if (!has_relevant(judgments)) return 0.0;

  double dcg = 0.0;
  const size_t depth = std::min(k, ranking.size());
  for (size_t i = 0; i < depth; ++i) {
    auto it = judgments.find(ranking[i]);
    if (it == judgments.end()) continue;
    dcg += gain_value(it->second, gain) / std::log2(static_cast<double>(i) + 2.0);
  }

  std::vector<int> grades;
  for (const auto& [id, grade] : judgments) {
    if (grade > 0) grades.push_back(grade);
  }
  std::sort(grades.begin(), grades.end(), std::greater<int>());
  double idcg = 0.0;
  for (size_t i = 0; i < std::min(k, grades.size()); ++i) {
    idcg += gain_value(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

double recall_at_k(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& judgments, size_t k) {
  if (k < 1) throw Error("recall_at_k: k must be >= 1");
  size_t relevant = 0;
  for (const auto& [id, grade] : judgments) {
    if (grade > 0) ++relevant;
  }
  if (relevant == 0) return 0.0;
  size_t found = 0;
  const size_t depth = std::min(k, ranking.size());
  for (size_t i = 0; i < depth; ++i) {
    auto it = judgments.find(ranking[i]);
    if (it != judgments.end() && it->second > 0) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(relevant);
}

EvalOutput evaluate_rankings(
    const std::vector<Query>& queries, const QrelSet& qrels,
    const std::function<std::vector<SearchHit>(const Query&)>& retrieve_fn,
    const EvalOptions& opts) {
  EvalOutput out;
  out.ndcg.name = "ndcg";
  out.ndcg.k = opts.k;
  out.recall.name = "recall";
  out.recall.k = opts.k;

  static const std::map<std::string, int> kNoJudgments;
  double ndcg_sum = 0.0;
  double recall_sum = 0.0;

  for (const auto& q : queries) {
    auto hits = retrieve_fn(q);
    std::vector<std::string> ranking;
    ranking.reserve(hits.size());
    for (const auto& h : hits) ranking.push_back(h.doc_id);

    const auto* judgments = qrels.for_query(q.id);
    const auto& j = judgments ? *judgments : kNoJudgments;
    const bool relevant = has_relevant(j);
    const double nd = relevant ? ndcg_at_k(ranking, j, opts.k, opts.gain) : 0.0;
    const double rc = relevant ? recall_at_k(ranking, j, opts.k) : 0.0;
    out.ndcg.per_query.emplace_back(q.id, nd);
    out.recall.per_query.emplace_back(q.id, rc);
    out.rankings.push_back({q.id, std::move(hits)});

    if (!relevant && opts.exclude_queries_without_relevant) {
      ++out.ndcg.excluded;
      ++out.recall.excluded;
      continue;
    }
    ndcg_sum += nd;
    recall_sum += rc;
    ++out.ndcg.evaluated;
    ++out.recall.evaluated;
  }

  out.ndcg.macro_average =
      out.ndcg.evaluated ? ndcg_sum / static_cast<double>(out.ndcg.evaluated) : 0.0;
  out.recall.macro_average =
      out.recall.evaluated ? recall_sum / static_cast<double>(out.recall.evaluated)
                           : 0.0;
  return out;
}

void save_rankings(const std::vector<PerQueryRanking>& rankings,
                   const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write rankings: " + path);
  for (const auto& r : rankings) {
    json ids = json::array();
    json scores = json::array();
    for (const auto& h : r.hits) {
      ids.push_back(h.doc_id);
      scores.push_back(h.score);
    }
    json rec{{"query_id", r.query_id}, {"doc_ids", ids}, {"scores", scores}};
    out << rec.dump() << '\n';
  }
}

std::vector<PerQueryRanking> load_rankings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read rankings: " + path);
  std::vector<PerQueryRanking> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    PerQueryRanking r;
    r.query_id = rec.at("query_id").get<std::string>();
    const auto& ids = rec.at("doc_ids");
    const auto& scores = rec.at("scores");
    for (size_t i = 0; i < ids.size(); ++i) {
      r.hits.push_back({ids[i].get<std::string>(), scores[i].get<double>()});
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string stage_table(const std::vector<std::pair<std::string, double>>& rows) {
  size_t label_width = 5;  // "stage"
  for (const auto& [label, v] : rows) label_width = std::max(label_width, label.size());

  std::string table = "stage";
  table.append(label_width - 5 + 2, ' ');
  table += "nDCG@10\n";
  char buf[32];
  for (const auto& [label, value] : rows) {
    table += label;
    table.append(label_width - label.size() + 2, ' ');
    std::snprintf(buf, sizeof(buf), "%.2f", value * 100.0);
    table += buf;
    table += '\n';
  }
  return table;
}

}  // namespace garboost
