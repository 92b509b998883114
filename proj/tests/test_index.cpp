#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "garboost/dense_index.hpp"
#include "garboost/error.hpp"
#include "test_util.hpp"

using namespace garboost;

namespace {

// Minimal deterministic retriever backed by a fixed text -> vector table.
class TableRetriever : public Retriever {
 public:
  TableRetriever(uint32_t dim, std::map<std::string, Vec> table)
      : dim_(dim), table_(std::move(table)) {}

  EmbedBatchResult embed_batch(const std::vector<std::string>& texts) override {
    EmbedBatchResult out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      Vec v = it != table_.end() ? it->second : Vec(dim_, 0.0);
      out.zero_flags.push_back(l2_norm(v) == 0.0);
      out.rows.push_back(std::move(v));
    }
    return out;
  }
  uint32_t dim() const override { return dim_; }
  bool normalized() const override { return false; }
  uint64_t fingerprint() const override { return 0xf00d; }

 private:
  uint32_t dim_;
  std::map<std::string, Vec> table_;
};

Corpus corpus_of(const std::vector<std::pair<std::string, std::string>>& docs) {
  Corpus c;
  for (const auto& [id, text] : docs) c.docs.push_back({id, "", text});
  return c;
}

// Index over n random docs; also returns the raw vectors keyed by doc id.
struct RandomIndexFixture {
  DenseIndex index;
  std::vector<std::pair<std::string, Vec>> vectors;
};

RandomIndexFixture random_index(size_t n, uint32_t dim, uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  Corpus corpus;
  std::map<std::string, Vec> table;
  RandomIndexFixture fx;
  for (size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "doc%05u", static_cast<unsigned>(i));
    Vec v(dim);
    for (auto& x : v) x = uniform();
    corpus.docs.push_back({id, "", std::string("text ") + id});
    table["text " + std::string(id)] = v;
    fx.vectors.emplace_back(id, std::move(v));
  }
  TableRetriever retriever(dim, table);
  fx.index = DenseIndex::build(corpus, retriever);
  return fx;
}

// Brute force oracle: score every doc with a plain loop, full sort, truncate.
std::vector<SearchHit> brute_force_search(
    const std::vector<std::pair<std::string, Vec>>& vectors, const Vec& q,
    size_t k) {
  std::vector<SearchHit> scored;
  for (const auto& [id, v] : vectors) {
    double s = 0.0;
    for (size_t j = 0; j < v.size(); ++j) s += v[j] * q[j];
    scored.push_back({id, s});
  }
  std::sort(scored.begin(), scored.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

void check_search_vs_bruteforce(const RandomIndexFixture& fx, const Vec& q,
                                size_t k) {
  auto hits = fx.index.search(q, k);
  auto oracle = brute_force_search(fx.vectors, q, k);
  REQUIRE(hits.size() == oracle.size());
  for (size_t i = 0; i < hits.size(); ++i) {
    CHECK(hits[i].doc_id == oracle[i].doc_id);
    CHECK(hits[i].score == oracle[i].score);  // exact f64 equality
  }
}

}  // namespace

TEST_CASE("build_index: one row per doc in corpus order, rebuild is bitwise equal") {
  auto corpus = corpus_of({{"a", "one"}, {"b", "two"}, {"c", "three"}});
  std::map<std::string, Vec> table = {
      {"one", {1, 0}}, {"two", {0, 1}}, {"three", {0.5, 0.5}}};
  TableRetriever retriever(2, table);

  auto index = DenseIndex::build(corpus, retriever);
  REQUIRE(index.size() == 3);
  CHECK(index.dim() == 2);
  CHECK(index.ids() == std::vector<std::string>{"a", "b", "c"});
  CHECK(index.row(0) == Vec{1, 0});
  CHECK(index.fingerprint() == 0xf00d);

  auto again = DenseIndex::build(corpus, retriever);
  CHECK(index.matrix() == again.matrix());

  // Row i equals embed_batch of that doc alone.
  auto single = retriever.embed_batch({"two"});
  CHECK(index.row(1) == single.rows[0]);
}

TEST_CASE("build_index flags zero-embedding docs") {
  auto corpus = corpus_of({{"a", "one"}, {"z", "unknown text"}});
  TableRetriever retriever(2, {{"one", {1, 0}}});
  auto index = DenseIndex::build(corpus, retriever);
  REQUIRE(index.zero_rows() == std::vector<std::string>{"z"});
  CHECK(index.row(1) == Vec{0, 0});
}

TEST_CASE("search on an orthonormal index") {
  auto corpus = corpus_of({{"d1", "e1"}, {"d2", "e2"}, {"d3", "e3"}});
  TableRetriever retriever(
      3, {{"e1", {1, 0, 0}}, {"e2", {0, 1, 0}}, {"e3", {0, 0, 1}}});
  auto index = DenseIndex::build(corpus, retriever);

  auto hits = index.search({0, 1, 0}, 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].doc_id == "d2");
  CHECK(hits[0].score == 1.0);

  SUBCASE("k >= N returns all docs fully sorted") {
    auto all = index.search({0.9, 0.5, 0.1}, 10);
    REQUIRE(all.size() == 3);
    CHECK(all[0].doc_id == "d1");
    CHECK(all[1].doc_id == "d2");
    CHECK(all[2].doc_id == "d3");
    CHECK(all[0].score >= all[1].score);
    CHECK(all[1].score >= all[2].score);
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(index.search({1, 0}, 1), DimMismatch);
  }
}

TEST_CASE("search equals a brute-force scan-and-sort oracle") {
  const uint32_t dim = 128;
  auto fx = random_index(1000, dim, 99);

  std::mt19937_64 gen(7);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };

  for (int trial = 0; trial < 25; ++trial) {
    Vec q(dim);
    for (auto& x : q) x = uniform();
    const size_t k = 1 + static_cast<size_t>(gen() % 20);
    check_search_vs_bruteforce(fx, q, k);
  }
}

TEST_CASE("mine_hard_negatives edge cases") {
  auto fx = random_index(50, 8, 3);
  Vec q(8, 0.1);

  SUBCASE("excluding every doc yields an empty result") {
    std::vector<std::string> all = fx.index.ids();
    CHECK(fx.index.mine_hard_negatives(q, all, 1, 10, 5, 1).empty());
  }

  SUBCASE("window [1,1] with no exclusions returns the single top hit") {
    auto top = fx.index.search(q, 1);
    auto mined = fx.index.mine_hard_negatives(q, {}, 1, 1, 5, 1);
    REQUIRE(mined.size() == 1);
    CHECK(mined[0] == top[0].doc_id);
  }

  SUBCASE("mined ids never intersect the exclusions") {
    std::vector<std::string> excluded = {fx.index.ids()[0], fx.index.ids()[7]};
    auto mined = fx.index.mine_hard_negatives(q, excluded, 1, 50, 20, 5);
    for (const auto& id : mined) {
      CHECK(std::find(excluded.begin(), excluded.end(), id) == excluded.end());
    }
  }

  SUBCASE("invalid window is rejected") {
    CHECK_THROWS_AS(fx.index.mine_hard_negatives(q, {}, 0, 5, 1, 1), Error);
    CHECK_THROWS_AS(fx.index.mine_hard_negatives(q, {}, 6, 5, 1, 1), Error);
  }
}

TEST_CASE("mine_hard_negatives equals a sort-slice-sample oracle") {
  auto fx = random_index(200, 16, 12);
  std::mt19937_64 gen(77);
  auto uniform = [&] { return (gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  Vec q(16);
  for (auto& x : q) x = uniform();
  std::vector<std::string> excluded = {fx.index.ids()[3], fx.index.ids()[42]};
  const uint64_t seed = 3;

  auto mined = fx.index.mine_hard_negatives(q, excluded, 30, 100, 5, seed);

  // Oracle: full brute-force sort, drop exclusions, slice ranks [30,100],
  // then the documented partial Fisher-Yates sample with mt19937_64(seed).
  auto full = brute_force_search(fx.vectors, q, fx.vectors.size());
  std::vector<std::string> remaining;
  for (const auto& hit : full) {
    if (std::find(excluded.begin(), excluded.end(), hit.doc_id) == excluded.end()) {
      remaining.push_back(hit.doc_id);
    }
  }
  std::vector<std::string> window(remaining.begin() + 29, remaining.begin() + 100);
  std::mt19937_64 g2(seed);
  auto bounded = [&](uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = g2();
    while (v >= limit) v = g2();
    return v % n;
  };
  std::vector<size_t> idx(window.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (size_t i = 0; i < 5; ++i) {
    size_t j = i + static_cast<size_t>(bounded(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  REQUIRE(mined.size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(mined[i] == window[idx[i]]);
  }
}

TEST_CASE("index persists with an f32 matrix and survives a round trip") {
  garboost::test::TempDir tmp;
  auto fx = random_index(20, 8, 5);
  const std::string path = tmp.file("index.bin");
  fx.index.save(path);
  auto loaded = DenseIndex::load(path);

  CHECK(loaded.size() == fx.index.size());
  CHECK(loaded.dim() == fx.index.dim());
  CHECK(loaded.fingerprint() == fx.index.fingerprint());
  CHECK(loaded.ids() == fx.index.ids());
  for (size_t i = 0; i < loaded.matrix().size(); ++i) {
    CHECK(loaded.matrix()[i] ==
          static_cast<double>(static_cast<float>(fx.index.matrix()[i])));
  }

  // save -> load -> save is byte stable.
  const std::string path2 = tmp.file("index2.bin");
  loaded.save(path2);
  auto reloaded = DenseIndex::load(path2);
  CHECK(reloaded.matrix() == loaded.matrix());
}
