#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "garboost/metrics.hpp"
#include "test_util.hpp"

using namespace garboost;

namespace {

// Independent brute-force nDCG: no shared helpers with the implementation.
double oracle_ndcg(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& judgments, size_t k,
                   bool linear_gain) {
  auto gain = [&](int r) {
    if (r <= 0) return 0.0;
    return linear_gain ? double(r) : std::pow(2.0, r) - 1.0;
  };
  bool any = false;
  for (auto& [id, g] : judgments) {
    if (g > 0) any = true;
  }
  if (!any) return 0.0;
  double dcg = 0.0;
  for (size_t i = 0; i < ranking.size() && i < k; ++i) {
    auto it = judgments.find(ranking[i]);
    if (it != judgments.end()) {
      dcg += gain(it->second) * std::log(2.0) / std::log(double(i) + 2.0);
    }
  }
  std::vector<int> grades;
  for (auto& [id, g] : judgments) grades.push_back(g);
  std::sort(grades.rbegin(), grades.rend());
  double idcg = 0.0;
  for (size_t i = 0; i < grades.size() && i < k; ++i) {
    idcg += gain(grades[i]) * std::log(2.0) / std::log(double(i) + 2.0);
  }
  return dcg / idcg;
}

double oracle_recall(const std::vector<std::string>& ranking,
                     const std::map<std::string, int>& judgments, size_t k) {
  size_t rel = 0;
  size_t hit = 0;
  for (auto& [id, g] : judgments) {
    if (g > 0) {
      ++rel;
      auto end = ranking.begin() + std::min(k, ranking.size());
      if (std::find(ranking.begin(), end, id) != end) ++hit;
    }
  }
  return rel == 0 ? 0.0 : double(hit) / double(rel);
}

}  // namespace

TEST_CASE("ndcg_at_k basics") {
  std::map<std::string, int> judgments = {{"d1", 1}};

  // sole relevant doc at rank 1
  CHECK(ndcg_at_k({"d1", "d2", "d3"}, judgments, 10) == doctest::Approx(1.0));

  // sole relevant doc at rank 2: 1/log2(3)
  CHECK(ndcg_at_k({"d2", "d1", "d3"}, judgments, 10) ==
        doctest::Approx(0.6309297535714574).epsilon(1e-12));

  // no relevant docs at all -> 0
  CHECK(ndcg_at_k({"d1"}, {{"d1", 0}}, 10) == 0.0);

  // relevant doc below rank k -> 0
  std::vector<std::string> ranking;
  for (int i = 0; i < 20; ++i) ranking.push_back("x" + std::to_string(i));
  ranking.push_back("d1");
  CHECK(ndcg_at_k(ranking, judgments, 10) == 0.0);
}

TEST_CASE("ndcg and recall agree with brute-force oracles on random cases") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n_docs = 1 + gen() % 30;
    std::vector<std::string> ids;
    for (size_t i = 0; i < n_docs; ++i) ids.push_back("d" + std::to_string(i));

    std::map<std::string, int> judgments;
    for (const auto& id : ids) {
      if (gen() % 3 == 0) judgments[id] = static_cast<int>(gen() % 4);
    }
    std::vector<std::string> ranking = ids;
    std::shuffle(ranking.begin(), ranking.end(), gen);
    const size_t k = 1 + gen() % 15;

    bool any_relevant = false;
    for (auto& [id, g] : judgments) {
      if (g > 0) any_relevant = true;
    }
    if (!any_relevant) {
      CHECK(ndcg_at_k(ranking, judgments, k) == 0.0);
      continue;
    }
    CHECK(std::abs(ndcg_at_k(ranking, judgments, k) -
                   oracle_ndcg(ranking, judgments, k, false)) < 1e-12);
    CHECK(std::abs(ndcg_at_k(ranking, judgments, k, GainKind::kLinear) -
                   oracle_ndcg(ranking, judgments, k, true)) < 1e-12);
    CHECK(std::abs(recall_at_k(ranking, judgments, k) -
                   oracle_recall(ranking, judgments, k)) < 1e-12);
  }
}

TEST_CASE("binary grades: exponential and linear gain give identical nDCG") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n_docs = 2 + gen() % 20;
    std::vector<std::string> ranking;
    std::map<std::string, int> judgments;
    for (size_t i = 0; i < n_docs; ++i) {
      ranking.push_back("d" + std::to_string(i));
      if (gen() % 2) judgments["d" + std::to_string(i)] = 1;
    }
    if (judgments.empty()) judgments[ranking[0]] = 1;
    std::shuffle(ranking.begin(), ranking.end(), gen);
    const size_t k = 1 + gen() % 12;
    CHECK(ndcg_at_k(ranking, judgments, k, GainKind::kExponential) ==
          doctest::Approx(ndcg_at_k(ranking, judgments, k, GainKind::kLinear))
              .epsilon(1e-12));
  }
}

TEST_CASE("ndcg invariances") {
  std::map<std::string, int> judgments = {{"r1", 2}, {"r2", 1}};

  SUBCASE("permuting non-relevant docs below the relevant ones is neutral") {
    std::vector<std::string> a = {"r1", "r2", "x1", "x2", "x3"};
    std::vector<std::string> b = {"r1", "r2", "x3", "x1", "x2"};
    CHECK(ndcg_at_k(a, judgments, 5) == ndcg_at_k(b, judgments, 5));
  }

  SUBCASE("swapping a relevant doc upward never decreases the value") {
    std::vector<std::string> worse = {"x1", "r1", "x2", "r2"};
    std::vector<std::string> better = {"r1", "x1", "x2", "r2"};
    CHECK(ndcg_at_k(better, judgments, 4) >= ndcg_at_k(worse, judgments, 4));
  }
}

TEST_CASE("recall_at_k basics") {
  std::map<std::string, int> judgments = {{"a", 1}, {"b", 1}};
  CHECK(recall_at_k({"a", "b", "c"}, judgments, 3) == 1.0);
  CHECK(recall_at_k({"x", "y", "z"}, judgments, 3) == 0.0);
  CHECK(recall_at_k({"a", "x", "b"}, judgments, 2) == doctest::Approx(0.5));
}

TEST_CASE("evaluate_rankings macro-averages and exclusion flag") {
  std::vector<Query> queries = {
      {"q1", "t", QuerySource::kOriginal, std::nullopt},
      {"q2", "t", QuerySource::kOriginal, std::nullopt},
      {"q3", "t", QuerySource::kOriginal, std::nullopt},  // no judgments
  };
  QrelSet qrels;
  qrels.judgments["q1"]["d1"] = 1;
  qrels.judgments["q2"]["d2"] = 1;

  auto retrieve = [](const Query& q) -> std::vector<SearchHit> {
    if (q.id == "q1") return {{"d1", 1.0}};  // hit at rank 1
    if (q.id == "q2") return {{"d9", 1.0}, {"d2", 0.9}};  // hit at rank 2
    return {{"d7", 0.5}};
  };

  EvalOptions opts;
  opts.k = 10;
  auto out = evaluate_rankings(queries, qrels, retrieve, opts);
  CHECK(out.ndcg.evaluated == 2);
  CHECK(out.ndcg.excluded == 1);
  CHECK(out.ndcg.macro_average ==
        doctest::Approx((1.0 + 0.6309297535714574) / 2).epsilon(1e-12));
  CHECK(out.recall.macro_average == doctest::Approx(1.0));
  REQUIRE(out.rankings.size() == 3);

  EvalOptions keep;
  keep.exclude_queries_without_relevant = false;
  auto out2 = evaluate_rankings(queries, qrels, retrieve, keep);
  CHECK(out2.ndcg.evaluated == 3);
  CHECK(out2.ndcg.macro_average ==
        doctest::Approx((1.0 + 0.6309297535714574) / 3).epsilon(1e-12));
}

TEST_CASE("rankings persist and reload") {
  garboost::test::TempDir tmp;
  std::vector<PerQueryRanking> rankings = {
      {"q1", {{"d1", 0.9}, {"d2", 0.5}}},
      {"q2", {{"d3", 0.1}}},
  };
  save_rankings(rankings, tmp.file("r.jsonl"));
  auto loaded = load_rankings(tmp.file("r.jsonl"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].query_id == "q1");
  REQUIRE(loaded[0].hits.size() == 2);
  CHECK(loaded[0].hits[1].doc_id == "d2");
  CHECK(loaded[0].hits[1].score == 0.5);
}

TEST_CASE("stage_table renders rows in order") {
  std::vector<std::pair<std::string, double>> rows = {
      {"Ret: 0, Gen: 0", 0.35},
      {"Ret: 0, Gen: 1", 0.405},
  };
  // label width 14 ("Ret: 0, Gen: 0") + 2 spaces of padding
  const std::string expected = std::string("stage") + std::string(11, ' ') +
                               "nDCG@10\n" +
                               "Ret: 0, Gen: 0  35.00\n" +
                               "Ret: 0, Gen: 1  40.50\n";
  CHECK(stage_table(rows) == expected);
  CHECK(stage_table({{"only", 0.5}}).find("only") != std::string::npos);
}
