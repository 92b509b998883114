#include <doctest.h>

#include <cmath>
#include <random>

#include "garboost/corpus.hpp"
#include "garboost/error.hpp"
#include "garboost/gar.hpp"
#include "garboost/toy_backend.hpp"

using namespace garboost;

TEST_CASE("combine_embeddings") {
  SUBCASE("no hypotheticals is the identity") {
    Vec q = {0.3, -0.7, 0.2};
    auto out = combine_embeddings(q, {}, {1.0});
    CHECK(out == q);
  }

  SUBCASE("two orthogonal components at half weight") {
    auto out = combine_embeddings({1, 0}, {{0, 1}}, {0.5, 0.5});
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("fixture matches a hand-computed weighted sum") {
    Vec q = {1.0, 2.0};
    Vec h1 = {-1.0, 0.5};
    Vec h2 = {0.25, 4.0};
    auto out = combine_embeddings(q, {h1, h2}, {0.8, 0.1, 0.1});
    // 0.8*1 + 0.1*(-1) + 0.1*0.25 ; 0.8*2 + 0.1*0.5 + 0.1*4
    CHECK(out[0] == doctest::Approx(0.725).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(2.05).epsilon(1e-12));
  }

  SUBCASE("weight violations are rejected") {
    CHECK_THROWS_AS(combine_embeddings({1, 0}, {{0, 1}}, {0.5}), WeightError);
    CHECK_THROWS_AS(combine_embeddings({1, 0}, {{0, 1}}, {0.9, 0.2}), WeightError);
    CHECK_THROWS_AS(combine_embeddings({1, 0}, {{0, 1}}, {1.1, -0.1}), WeightError);
    CHECK_THROWS_AS(combine_embeddings({1, 0}, {{0, 1, 2}}, {0.5, 0.5}),
                    DimMismatch);
  }

  SUBCASE("all components equal v returns v exactly") {
    Vec v = {0.25, -0.5, 0.125};  // dyadic values: convexity is exact
    auto out = combine_embeddings(v, {v, v}, {0.5, 0.25, 0.25});
    CHECK(out == v);
  }
}

TEST_CASE("simplified_combine") {
  SUBCASE("alpha range is open") {
    CHECK_THROWS_AS(simplified_combine({1}, {1}, 1.0), WeightError);
    CHECK_THROWS_AS(simplified_combine({1}, {1}, 0.0), WeightError);
  }

  SUBCASE("v_q = v_h is a fixed point for any alpha") {
    Vec v = {0.3, 0.4};
    for (double a : {0.2, 0.5, 0.8}) {
      auto out = simplified_combine(v, v, a);
      CHECK(out[0] == doctest::Approx(v[0]).epsilon(1e-15));
      CHECK(out[1] == doctest::Approx(v[1]).epsilon(1e-15));
    }
  }

  SUBCASE("score arithmetic: alpha=0.8 with dots 0.5 and 1.0 gives 0.6") {
    // v_q.v_d = 0.5, v_h.v_d = 1.0 on unit vectors
    Vec d = {1, 0};
    Vec q = {0.5, std::sqrt(0.75)};
    Vec h = {1, 0};
    auto combined = simplified_combine(q, h, 0.8);
    CHECK(preference_score(combined, d) == doctest::Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("preference_score") {
  CHECK(preference_score({0.5, 0.5}, {1, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(preference_score({1, 0}, {0, 1}) == 0.0);
  CHECK_THROWS_AS(preference_score({1, 0}, {1, 0, 0}), DimMismatch);

  SUBCASE("random 128-dim fixture matches an independent dot oracle") {
    std::mt19937_64 gen(31);
    auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    Vec a(128), b(128);
    for (auto& x : a) x = uniform();
    for (auto& x : b) x = uniform();
    long double acc = 0.0L;  // higher-precision independent accumulation
    for (size_t i = 0; i < a.size(); ++i) acc += (long double)a[i] * b[i];
    CHECK(preference_score(a, b) ==
          doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
  }
}

TEST_CASE("preference_score is exactly linear in alpha") {
  std::mt19937_64 gen(8);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  Vec q(32), h(32), d(32);
  for (auto& x : q) x = uniform();
  for (auto& x : h) x = uniform();
  for (auto& x : d) x = uniform();
  const double qd = dot(q, d);
  const double hd = dot(h, d);
  for (int i = 1; i <= 9; ++i) {
    const double alpha = i / 10.0;
    const double s = preference_score(simplified_combine(q, h, alpha), d);
    CHECK(s == doctest::Approx(alpha * qd + (1 - alpha) * hd).epsilon(1e-12));
  }
}

TEST_CASE("convexity: combined norm is bounded by the largest component norm") {
  std::mt19937_64 gen(17);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  for (int trial = 0; trial < 50; ++trial) {
    Vec q(16), h1(16), h2(16);
    for (auto& x : q) x = uniform();
    for (auto& x : h1) x = uniform();
    for (auto& x : h2) x = uniform();
    auto out = combine_embeddings(q, {h1, h2}, {0.6, 0.3, 0.1});
    const double bound =
        std::max({l2_norm(q), l2_norm(h1), l2_norm(h2)});
    CHECK(l2_norm(out) <= bound + 1e-12);
  }
}

namespace {

Corpus tiny_corpus() {
  Corpus c;
  c.docs.push_back({"d1", "", "solar panels convert sunlight into electricity"});
  c.docs.push_back({"d2", "", "wind turbines convert air motion into power"});
  c.docs.push_back({"d3", "", "a recipe for sourdough bread and pastry"});
  c.docs.push_back({"d4", "", "photovoltaic cells and solar panel efficiency"});
  return c;
}

}  // namespace

TEST_CASE("gar_retrieve: L = 0 degenerates to plain search") {
  auto corpus = tiny_corpus();
  ToyBackendConfig cfg;
  cfg.embedder.hasher.dim = 512;
  cfg.embedder.dim_embed = 32;
  ToyBackend backend(cfg, corpus);
  auto index = DenseIndex::build(corpus, backend.retriever());

  GarRetrieveConfig gar_cfg;
  gar_cfg.num_hypothetical = 0;
  gar_cfg.k = 4;
  auto result = gar_retrieve("q1", "solar sunlight electricity", index,
                             backend.retriever(), backend.generator(), gar_cfg);

  auto qv = backend.retriever().embed_one("solar sunlight electricity");
  auto plain = index.search(qv.vector, 4);
  REQUIRE(result.hits.size() == plain.size());
  for (size_t i = 0; i < plain.size(); ++i) {
    CHECK(result.hits[i].doc_id == plain[i].doc_id);
    CHECK(result.hits[i].score == plain[i].score);
  }
}

TEST_CASE("gar_retrieve equals the manual sample-embed-combine-search composition") {
  auto corpus = tiny_corpus();
  ToyBackendConfig cfg;
  cfg.embedder.hasher.dim = 512;
  cfg.embedder.dim_embed = 32;
  ToyBackend backend(cfg, corpus);
  auto index = DenseIndex::build(corpus, backend.retriever());

  const std::string query = "solar sunlight electricity";
  GarRetrieveConfig gar_cfg;
  gar_cfg.num_hypothetical = 2;
  gar_cfg.alpha0 = 0.8;
  gar_cfg.k = 3;
  gar_cfg.seed = 1234;

  auto result = gar_retrieve("q1", query, index, backend.retriever(),
                             backend.generator(), gar_cfg);

  // Manual composition with the same seed.
  const auto& pool = backend.pool(query);
  auto picks = backend.policy().sample(pool, 2, 1234);
  auto qv = backend.retriever().embed_one(query);
  std::vector<Vec> hyp_vecs;
  for (size_t p : picks) {
    hyp_vecs.push_back(backend.retriever().embed_one(pool.candidates[p].text).vector);
  }
  auto combined = combine_embeddings(qv.vector, hyp_vecs, {0.8, 0.1, 0.1});
  auto expected = index.search(combined, 3);

  REQUIRE(result.hits.size() == expected.size());
  for (size_t i = 0; i < expected.size(); ++i) {
    CHECK(result.hits[i].doc_id == expected[i].doc_id);
    CHECK(result.hits[i].score == expected[i].score);
  }

  SUBCASE("same seed twice gives identical hit lists") {
    auto again = gar_retrieve("q1", query, index, backend.retriever(),
                              backend.generator(), gar_cfg);
    REQUIRE(again.hits.size() == result.hits.size());
    for (size_t i = 0; i < again.hits.size(); ++i) {
      CHECK(again.hits[i].doc_id == result.hits[i].doc_id);
      CHECK(again.hits[i].score == result.hits[i].score);
    }
  }
}

TEST_CASE("gar_retrieve rejects an index built with different params") {
  auto corpus = tiny_corpus();
  ToyBackendConfig cfg;
  cfg.embedder.hasher.dim = 512;
  cfg.embedder.dim_embed = 32;
  ToyBackend backend(cfg, corpus);
  auto index = DenseIndex::build(corpus, backend.retriever());

  backend.embedder().mutable_weights()[0] += 1.0;
  backend.embedder().invalidate_fingerprint();

  GarRetrieveConfig gar_cfg;
  CHECK_THROWS_AS(gar_retrieve("q", "solar", index, backend.retriever(),
                               backend.generator(), gar_cfg),
                  FingerprintMismatch);
}
