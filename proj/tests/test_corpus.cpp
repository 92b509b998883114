#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "garboost/corpus.hpp"
#include "garboost/error.hpp"
#include "test_util.hpp"

using namespace garboost;
using garboost::test::TempDir;
using garboost::test::write_file;

namespace {

Corpus fixture_corpus(size_t n) {
  Corpus c;
  for (size_t i = 0; i < n; ++i) {
    c.docs.push_back({"doc" + std::to_string(i), "title " + std::to_string(i),
                      "body text number " + std::to_string(i)});
  }
  return c;
}

}  // namespace

TEST_CASE("load_corpus parses well-formed records in order") {
  TempDir tmp;
  write_file(tmp.file("c.jsonl"),
             R"({"_id":"a","title":"Alpha","text":"first doc"})"
             "\n"
             R"({"_id":"b","title":"","text":"second doc"})"
             "\n");
  auto corpus = load_corpus(tmp.file("c.jsonl"));
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.docs[0].id == "a");
  CHECK(corpus.docs[0].title == "Alpha");
  CHECK(corpus.docs[1].id == "b");
  CHECK(corpus.docs[1].embedding_text() == "second doc");
  CHECK(corpus.docs[0].embedding_text() == "Alpha. first doc");
}

TEST_CASE("load_corpus error paths") {
  TempDir tmp;

  write_file(tmp.file("empty.jsonl"), "");
  CHECK_THROWS_AS(load_corpus(tmp.file("empty.jsonl")), EmptyCorpus);

  write_file(tmp.file("dup.jsonl"),
             R"({"_id":"d1","title":"","text":"x"})"
             "\n"
             R"({"_id":"d1","title":"","text":"y"})"
             "\n");
  CHECK_THROWS_WITH_AS(load_corpus(tmp.file("dup.jsonl")), "duplicate id: d1",
                       DuplicateId);

  write_file(tmp.file("bad.jsonl"),
             R"({"_id":"a","title":"","text":"x"})"
             "\n"
             "not json\n");
  try {
    load_corpus(tmp.file("bad.jsonl"));
    FAIL("expected MalformedRecord");
  } catch (const MalformedRecord& e) {
    CHECK(e.line_number == 2);
  }

  CHECK_THROWS_AS(load_corpus(tmp.file("missing.jsonl")), IoError);
}

TEST_CASE("load_queries marks plain records original and rejects blanks") {
  TempDir tmp;
  write_file(tmp.file("q.jsonl"), R"({"_id":"q1","text":"what is a thing"})"
                                  "\n");
  auto queries = load_queries(tmp.file("q.jsonl"));
  REQUIRE(queries.size() == 1);
  CHECK(queries[0].source == QuerySource::kOriginal);
  CHECK(!queries[0].provenance_doc.has_value());

  write_file(tmp.file("blank.jsonl"), R"({"_id":"q1","text":""})"
                                      "\n");
  CHECK_THROWS_AS(load_queries(tmp.file("blank.jsonl")), MalformedRecord);
}

TEST_CASE("queries round-trip save+load identically") {
  TempDir tmp;
  std::vector<Query> queries;
  queries.push_back({"q1", "plain query", QuerySource::kOriginal, std::nullopt});
  queries.push_back({"q2", "made up query", QuerySource::kSynthetic, "doc7"});

  save_queries(queries, tmp.file("q.jsonl"));
  auto loaded = load_queries(tmp.file("q.jsonl"));
  REQUIRE(loaded.size() == queries.size());
  for (size_t i = 0; i < queries.size(); ++i) {
    CHECK(loaded[i].id == queries[i].id);
    CHECK(loaded[i].text == queries[i].text);
    CHECK(loaded[i].source == queries[i].source);
    CHECK(loaded[i].provenance_doc == queries[i].provenance_doc);
  }

  // Parse-serialize-parse is the identity.
  save_queries(loaded, tmp.file("q2.jsonl"));
  CHECK(garboost::test::read_file(tmp.file("q.jsonl")) ==
        garboost::test::read_file(tmp.file("q2.jsonl")));
}

TEST_CASE("load_qrels parses rows and rejects bad input") {
  TempDir tmp;
  write_file(tmp.file("q.tsv"), "query-id\tcorpus-id\tscore\nq1\td1\t1\nq1\td2\t0\n");
  auto qrels = load_qrels(tmp.file("q.tsv"));
  REQUIRE(qrels.for_query("q1") != nullptr);
  CHECK(qrels.for_query("q1")->at("d1") == 1);
  CHECK(qrels.for_query("q1")->at("d2") == 0);

  write_file(tmp.file("dup.tsv"), "q1\td1\t1\nq1\td1\t2\n");
  CHECK_THROWS_AS(load_qrels(tmp.file("dup.tsv")), DuplicateJudgment);

  write_file(tmp.file("neg.tsv"), "q1\td1\t-1\n");
  CHECK_THROWS_AS(load_qrels(tmp.file("neg.tsv")), InvalidGrade);

  write_file(tmp.file("nonint.tsv"), "q1\td1\thigh\n");
  CHECK_THROWS_AS(load_qrels(tmp.file("nonint.tsv")), InvalidGrade);
}

TEST_CASE("qrels round-trip through save_qrels") {
  TempDir tmp;
  QrelSet qrels;
  qrels.judgments["q1"]["d1"] = 2;
  qrels.judgments["q1"]["d2"] = 0;
  qrels.judgments["q2"]["d3"] = 1;
  save_qrels(qrels, tmp.file("q.tsv"));
  auto loaded = load_qrels(tmp.file("q.tsv"));
  CHECK(loaded.judgments == qrels.judgments);
}

TEST_CASE("bundle validation rejects dangling references") {
  DatasetBundle bundle;
  bundle.corpus = fixture_corpus(3);
  bundle.queries.push_back({"q1", "text", QuerySource::kOriginal, std::nullopt});
  bundle.qrels.judgments["q1"]["doc1"] = 1;
  CHECK_NOTHROW(validate_bundle(bundle));

  SUBCASE("unknown doc in qrels") {
    bundle.qrels.judgments["q1"]["nope"] = 1;
    CHECK_THROWS_AS(validate_bundle(bundle), BundleValidationError);
  }
  SUBCASE("unknown query in qrels") {
    bundle.qrels.judgments["q9"]["doc1"] = 1;
    CHECK_THROWS_AS(validate_bundle(bundle), BundleValidationError);
  }
  SUBCASE("synthetic query without provenance") {
    bundle.queries.push_back({"q2", "text", QuerySource::kSynthetic, std::nullopt});
    CHECK_THROWS_AS(validate_bundle(bundle), BundleValidationError);
  }
  SUBCASE("synthetic query with dangling provenance") {
    bundle.queries.push_back({"q2", "text", QuerySource::kSynthetic, "ghost"});
    CHECK_THROWS_AS(validate_bundle(bundle), BundleValidationError);
  }
}

TEST_CASE("sample_documents basics") {
  auto corpus = fixture_corpus(10);
  CHECK(sample_documents(corpus, 0, 1).empty());
  CHECK(sample_documents(corpus, 10, 1).size() == 10);
  CHECK(sample_documents(corpus, 99, 1).size() == 10);
}

TEST_CASE("sample_documents matches an independent rerun of the documented sampler") {
  auto corpus = fixture_corpus(100);
  auto sample = sample_documents(corpus, 5, 7);
  REQUIRE(sample.size() == 5);

  // Independent oracle: partial Fisher-Yates over indices with mt19937_64(7),
  // draws mapped by rejection sampling, exactly as documented in rng.hpp.
  std::mt19937_64 gen(7);
  auto bounded = [&](uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = gen();
    while (v >= limit) v = gen();
    return v % n;
  };
  std::vector<size_t> idx(100);
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (size_t i = 0; i < 5; ++i) {
    size_t j = i + static_cast<size_t>(bounded(100 - i));
    std::swap(idx[i], idx[j]);
  }
  for (size_t i = 0; i < 5; ++i) {
    CHECK(sample[i].id == corpus.docs[idx[i]].id);
  }
}

TEST_CASE("sample_documents is a deterministic duplicate-free subset") {
  auto corpus = fixture_corpus(30);
  std::set<std::string> corpus_ids;
  for (const auto& d : corpus.docs) corpus_ids.insert(d.id);

  for (uint64_t seed : {1ULL, 2ULL, 99ULL}) {
    auto a = sample_documents(corpus, 12, seed);
    auto b = sample_documents(corpus, 12, seed);
    REQUIRE(a.size() == b.size());
    std::set<std::string> seen;
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK(corpus_ids.count(a[i].id) == 1);
      CHECK(seen.insert(a[i].id).second);
    }
  }
}

TEST_CASE("corpus round-trip is the identity") {
  TempDir tmp;
  auto corpus = fixture_corpus(5);
  save_corpus(corpus, tmp.file("c.jsonl"));
  auto loaded = load_corpus(tmp.file("c.jsonl"));
  save_corpus(loaded, tmp.file("c2.jsonl"));
  CHECK(garboost::test::read_file(tmp.file("c.jsonl")) ==
        garboost::test::read_file(tmp.file("c2.jsonl")));
}
