#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "garboost/corpus.hpp"
#include "garboost/error.hpp"
#include "garboost/gar.hpp"
#include "garboost/rlrf.hpp"
#include "garboost/toy_backend.hpp"
#include "test_util.hpp"

using namespace garboost;

namespace {

Corpus energy_corpus() {
  Corpus c;
  c.docs.push_back({"d1", "", "solar panels convert sunlight into electricity"});
  c.docs.push_back({"d2", "", "wind turbines convert air motion into power"});
  c.docs.push_back({"d3", "", "a recipe for bread with flour and yeast"});
  c.docs.push_back({"d4", "", "photovoltaic cells improve solar panel efficiency"});
  c.docs.push_back({"d5", "", "tidal generators harvest ocean wave energy"});
  return c;
}

ToyBackend make_backend(const Corpus& corpus) {
  ToyBackendConfig cfg;
  cfg.embedder.hasher.dim = 1024;
  cfg.embedder.dim_embed = 32;
  cfg.psi_dim = 32;
  cfg.pool_passages = 4;
  return ToyBackend(cfg, corpus);
}

}  // namespace

TEST_CASE("score_hypotheticals") {
  auto corpus = energy_corpus();
  auto backend = make_backend(corpus);
  const std::string query = "solar sunlight electricity";
  const std::string dstar = corpus.docs[0].embedding_text();

  SUBCASE("candidate equal to the query text scores exactly s_q") {
    auto scores = score_hypotheticals(query, {query}, dstar,
                                      backend.retriever(), 0.8);
    REQUIRE(scores.candidates.size() == 1);
    CHECK(scores.candidates[0].score ==
          doctest::Approx(scores.query_score).epsilon(1e-12));
  }

  SUBCASE("eight candidates match the combine-then-dot composition oracle") {
    std::vector<std::string> candidates;
    for (const auto& d : corpus.docs) candidates.push_back(d.embedding_text());
    candidates.push_back("solar energy overview");
    candidates.push_back("sourdough starter guide");
    candidates.push_back(query);
    REQUIRE(candidates.size() == 8);

    auto scores = score_hypotheticals(query, candidates, dstar,
                                      backend.retriever(), 0.8);
    REQUIRE(scores.candidates.size() == 8);

    auto qv = backend.retriever().embed_one(query);
    auto dv = backend.retriever().embed_one(dstar);
    CHECK(scores.query_score ==
          doctest::Approx(dot(qv.vector, dv.vector)).epsilon(1e-12));
    for (const auto& cand : scores.candidates) {
      auto hv = backend.retriever().embed_one(cand.text);
      const double expected =
          preference_score(simplified_combine(qv.vector, hv.vector, 0.8), dv.vector);
      CHECK(cand.score == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("zero-embedding candidates are dropped and counted") {
    auto scores = score_hypotheticals(query, {"", dstar}, dstar,
                                      backend.retriever(), 0.8);
    CHECK(scores.dropped_zero == 1);
    REQUIRE(scores.candidates.size() == 1);
    CHECK(scores.candidates[0].sample_index == 1);
  }
}

TEST_CASE("select_extremes") {
  HypotheticalScores scores;
  scores.query_score = 0.0;

  SUBCASE("two candidates") {
    scores.candidates = {{0, "low", 0.1}, {1, "high", 0.9}};
    auto [w, l] = select_extremes(scores);
    CHECK(w.text == "high");
    CHECK(l.text == "low");
  }

  SUBCASE("all-equal scores fall back to (first, second)") {
    scores.candidates = {{0, "a", 0.5}, {1, "b", 0.5}, {2, "c", 0.5}};
    auto [w, l] = select_extremes(scores);
    CHECK(w.text == "a");
    CHECK(l.text == "b");
    // and the filter rejects such a degenerate pair
    CHECK_FALSE(apply_filter(w.score, l.score, 0.1, 1.05).accepted);
  }

  SUBCASE("fewer than two candidates is an error") {
    scores.candidates = {{0, "only", 0.5}};
    CHECK_THROWS_AS(select_extremes(scores), NotEnoughCandidates);
  }

  SUBCASE("random fixture equals a brute-force max/min scan") {
    std::mt19937_64 gen(3);
    scores.candidates.clear();
    for (size_t i = 0; i < 8; ++i) {
      scores.candidates.push_back(
          {i, "cand" + std::to_string(i), (gen() >> 11) * 0x1.0p-53});
    }
    auto [w, l] = select_extremes(scores);
    size_t best = 0, worst = 0;
    for (size_t i = 1; i < 8; ++i) {
      if (scores.candidates[i].score > scores.candidates[best].score) best = i;
      if (scores.candidates[i].score < scores.candidates[worst].score) worst = i;
    }
    CHECK(w.sample_index == best);
    CHECK(l.sample_index == worst);
  }
}

TEST_CASE("apply_filter evaluates both rules literally") {
  // s_q=0.3, s_w=0.5, s_l=0.4, gamma=1.1: 0.5 > 0.3 and 0.5 > 0.44
  auto d1 = apply_filter(0.5, 0.4, 0.3, 1.1);
  CHECK(d1.accepted);

  // s_q=0.3, s_w=0.5, s_l=0.48, gamma=1.05: 0.5 <= 0.504 -> rule-2
  auto d2 = apply_filter(0.5, 0.48, 0.3, 1.05);
  CHECK_FALSE(d2.accepted);
  CHECK(d2.reason == std::string("rule-2"));

  // s_w = s_l = s > 0 is rejected for any gamma > 1
  for (double gamma : {1.01, 1.05, 1.1, 2.0}) {
    CHECK_FALSE(apply_filter(0.5, 0.5, 0.1, gamma).accepted);
  }

  CHECK(apply_filter(0.5, -0.2, 0.3, 1.1).accepted);  // rule 2 verbatim on s_l <= 0
  CHECK_FALSE(apply_filter(0.2, 0.1, 0.3, 1.1).accepted);
  CHECK(apply_filter(0.2, 0.1, 0.3, 1.1).reason == std::string("rule-1"));

  CHECK_THROWS_AS(apply_filter(0.5, 0.4, 0.3, 1.0), Error);
}

TEST_CASE("filter acceptance is monotone in the rules") {
  // Over random tuples, acceptance with both rules on is a subset of
  // acceptance with either rule disabled (metamorphic property).
  std::mt19937_64 gen(11);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int trial = 0; trial < 10000; ++trial) {
    const double s_w = uniform();
    const double s_l = uniform();
    const double s_q = uniform();
    const double gamma = 1.0 + (gen() >> 11) * 0x1.0p-53 * 0.5 + 1e-9;
    auto d = apply_filter(s_w, s_l, s_q, gamma);
    CHECK(d.accepted == (d.rule1_ok && d.rule2_ok));
    if (d.accepted) {
      CHECK(s_w > s_q);
      CHECK(s_w > gamma * s_l);
    }
  }
}

TEST_CASE("dpo_loss values") {
  const double ln2 = 0.6931471805599453;
  CHECK(std::abs(dpo_loss(-1.0, -1.0, -2.0, -2.0, 0.1) - ln2) < 1e-12);

  // Oracle: -ln sigmoid(0.07) evaluated at high precision (mpmath, 30 digits).
  const double expected = 0.6587595555486971;
  CHECK(std::abs(dpo_loss(-1.0, -1.2, -2.0, -1.5, 0.1) - expected) < 1e-12);

  // margin -> +inf drives the loss to 0
  CHECK(dpo_loss(300.0, 0.0, -300.0, 0.0, 0.1) < 1e-12);

  CHECK_THROWS_AS(dpo_loss(std::nan(""), 0, 0, 0, 0.1), Error);
  CHECK_THROWS_AS(dpo_loss(0, 0, 0, 0, -1.0), Error);
}

TEST_CASE("dpo_loss is strictly decreasing in the margin and bounded below") {
  double prev = std::numeric_limits<double>::infinity();
  for (double margin = -30.0; margin <= 30.0; margin += 0.5) {
    // lp_w - lp_w_ref = margin/beta with beta = 1, everything else 0
    const double loss = dpo_loss(margin, 0.0, 0.0, 0.0, 1.0);
    CHECK(loss >= 0.0);
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("sft_loss") {
  CHECK(sft_loss(0.0) == 0.0);
  CHECK(sft_loss(std::log(0.25)) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
}

namespace {

struct PolicyFixture {
  CandidatePool pool;
  ToyPolicy policy{6};
  std::vector<PreferencePair> pairs;
  PoolMap pools;

  explicit PolicyFixture(uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    pool.query_id = "q1";
    pool.query_text = "q1";
    for (int c = 0; c < 5; ++c) {
      Vec psi(6);
      for (auto& x : psi) x = uniform();
      pool.candidates.push_back({"cand" + std::to_string(c), psi});
    }
    Vec theta(6);
    for (auto& x : theta) x = uniform();
    policy.set_theta(theta);
    policy.freeze_reference();
    // Move theta a bit off the reference so DPO gradients are non-trivial.
    theta[0] += 0.3;
    theta[3] -= 0.2;
    policy.set_theta(theta);

    PreferencePair pair;
    pair.query_id = "q1";
    pair.query_text = "q1";
    pair.winning_text = "cand1";
    pair.losing_text = "cand3";
    pair.score_win = 0.9;
    pair.score_lose = 0.1;
    pair.score_query = 0.5;
    pair.gamma = 1.05;
    pairs.push_back(pair);
    pools.emplace("q1", &pool);
  }
};

double policy_batch_loss(const ToyPolicy& policy, const PolicyFixture& fx,
                         const DpoConfig& cfg) {
  double total = 0.0;
  for (const auto& pair : fx.pairs) {
    const auto& pool = *fx.pools.at(pair.query_id);
    const size_t wi = static_cast<size_t>(pool.find(pair.winning_text));
    const size_t li = static_cast<size_t>(pool.find(pair.losing_text));
    const double lp_w = policy.logprob(pool, wi);
    if (cfg.objective == PolicyObjective::kSft) {
      total += sft_loss(lp_w);
    } else {
      total += dpo_loss(lp_w, policy.logprob_ref(pool, wi),
                        policy.logprob(pool, li), policy.logprob_ref(pool, li),
                        cfg.beta);
    }
  }
  return total / static_cast<double>(fx.pairs.size());
}

}  // namespace

TEST_CASE("train_policy: one small step strictly decreases the loss") {
  PolicyFixture fx(21);
  DpoConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.steps = 1;
  auto result = train_policy(fx.policy, fx.pairs, fx.pools, cfg);
  REQUIRE(result.loss_trace.size() == 2);
  CHECK(result.loss_trace[1] < result.loss_trace[0]);
}

TEST_CASE("train_policy gradient matches central finite differences") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    for (auto objective : {PolicyObjective::kDpo, PolicyObjective::kSft}) {
      PolicyFixture fx(seed);
      DpoConfig cfg;
      cfg.objective = objective;

      // Analytic gradient: recovered from one plain GD step.
      ToyPolicy trained = fx.policy;
      DpoConfig one_step = cfg;
      one_step.steps = 1;
      one_step.learning_rate = 1.0;
      train_policy(trained, fx.pairs, fx.pools, one_step);
      Vec analytic(6);
      for (size_t j = 0; j < 6; ++j) {
        analytic[j] = fx.policy.theta()[j] - trained.theta()[j];
      }

      const double h = 1e-6;
      double max_rel = 0.0;
      for (size_t j = 0; j < 6; ++j) {
        ToyPolicy up = fx.policy;
        ToyPolicy down = fx.policy;
        Vec tu = up.theta(), td = down.theta();
        tu[j] += h;
        td[j] -= h;
        up.set_theta(tu);
        down.set_theta(td);
        const double fd = (policy_batch_loss(up, fx, cfg) -
                           policy_batch_loss(down, fx, cfg)) /
                          (2 * h);
        const double denom = std::max({std::abs(analytic[j]), std::abs(fd), 1e-4});
        max_rel = std::max(max_rel, std::abs(analytic[j] - fd) / denom);
      }
      CHECK(max_rel <= 1e-4);
    }
  }
}

TEST_CASE("train_policy widens the winner-loser margin and freezes the reference") {
  PolicyFixture fx(9);
  const size_t wi = static_cast<size_t>(fx.pool.find("cand1"));
  const size_t li = static_cast<size_t>(fx.pool.find("cand3"));
  const double margin_before =
      fx.policy.logprob(fx.pool, wi) - fx.policy.logprob(fx.pool, li);
  const Vec ref_before = fx.policy.theta_ref();

  DpoConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.steps = 200;
  train_policy(fx.policy, fx.pairs, fx.pools, cfg);

  const double margin_after =
      fx.policy.logprob(fx.pool, wi) - fx.policy.logprob(fx.pool, li);
  CHECK(margin_after > margin_before);
  CHECK(fx.policy.theta_ref() == ref_before);  // bitwise untouched
}

TEST_CASE("train_policy rejects pairs missing from their pool") {
  PolicyFixture fx(5);
  fx.pairs[0].winning_text = "not in pool";
  DpoConfig cfg;
  CHECK_THROWS_AS(train_policy(fx.policy, fx.pairs, fx.pools, cfg),
                  CandidateNotInPool);
}

TEST_CASE("export_pairs round-trips and writes valid records") {
  garboost::test::TempDir tmp;

  SUBCASE("empty list produces a valid empty file") {
    CHECK(export_pairs({}, "task", tmp.file("empty.jsonl")) == 0);
    CHECK(import_pairs(tmp.file("empty.jsonl")).empty());
  }

  SUBCASE("two pairs round-trip") {
    std::vector<PreferencePair> pairs(2);
    pairs[0] = {"q1", "first query", "winner one", "loser one", 0.9, 0.2, 0.5, 1.05};
    pairs[1] = {"q2", "second query", "winner two", "loser two", 0.7, 0.1, 0.3, 1.08};
    CHECK(export_pairs(pairs, "demo task", tmp.file("pairs.jsonl")) == 2);

    auto loaded = import_pairs(tmp.file("pairs.jsonl"));
    REQUIRE(loaded.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
      CHECK(loaded[i].query_id == pairs[i].query_id);
      CHECK(loaded[i].query_text == pairs[i].query_text);
      CHECK(loaded[i].winning_text == pairs[i].winning_text);
      CHECK(loaded[i].losing_text == pairs[i].losing_text);
      CHECK(loaded[i].score_win == pairs[i].score_win);
      CHECK(loaded[i].score_lose == pairs[i].score_lose);
      CHECK(loaded[i].score_query == pairs[i].score_query);
      CHECK(loaded[i].gamma == pairs[i].gamma);
    }

    // Schema check: every line carries prompt/chosen/rejected/meta and the
    // prompt embeds the query text.
    std::ifstream in(tmp.file("pairs.jsonl"));
    std::string line;
    size_t lines = 0;
    while (std::getline(in, line)) {
      auto rec = nlohmann::json::parse(line);
      CHECK(rec.contains("prompt"));
      CHECK(rec.contains("chosen"));
      CHECK(rec.contains("rejected"));
      CHECK(rec.at("meta").contains("s_w"));
      CHECK(rec.at("meta").contains("s_l"));
      CHECK(rec.at("meta").contains("s_q"));
      CHECK(rec.at("meta").contains("gamma"));
      CHECK(rec.at("prompt").get<std::string>().find(
                pairs[lines].query_text) != std::string::npos);
      CHECK(rec.at("prompt").get<std::string>().find("demo task") !=
            std::string::npos);
      ++lines;
    }
    CHECK(lines == 2);
  }
}
