#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace garboost {

struct Document {
  std::string id;
  std::string title;  // may be empty
  std::string text;

  // Text fed to the embedder: "title. text" when the title is non-empty,
  // otherwise just the body.
  std::string embedding_text() const {
    return title.empty() ? text : title + ". " + text;
  }
};

enum class QuerySource { kOriginal, kSynthetic };

struct Query {
  std::string id;
  std::string text;
  QuerySource source = QuerySource::kOriginal;
  std::optional<std::string> provenance_doc;  // set iff synthetic
};

// Graded relevance judgments: query id -> doc id -> grade (>= 0).
struct QrelSet {
  std::map<std::string, std::map<std::string, int>> judgments;

  bool empty() const { return judgments.empty(); }
  const std::map<std::string, int>* for_query(const std::string& query_id) const {
    auto it = judgments.find(query_id);
    return it == judgments.end() ? nullptr : &it->second;
  }
};

struct Corpus {
  std::vector<Document> docs;

  size_t size() const { return docs.size(); }
  const Document* find(const std::string& id) const;
};

struct DatasetBundle {
  Corpus corpus;
  std::vector<Query> queries;
  QrelSet qrels;  // may be empty for unlabeled corpora
};

// --- loading / saving --------------------------------------------------------
//
// Corpus and query files are line-delimited JSON records. A corpus record has
// fields _id (string), title (string, optional) and text (string); a query
// record has _id and text, plus optional source ("original"/"synthetic") and
// provenance_doc. Qrels are tab-separated "query-id<TAB>corpus-id<TAB>score"
// rows with an optional header line exactly "query-id\tcorpus-id\tscore".

Corpus load_corpus(const std::string& path);
std::vector<Query> load_queries(const std::string& path);
QrelSet load_qrels(const std::string& path);

void save_corpus(const Corpus& corpus, const std::string& path);
void save_queries(const std::vector<Query>& queries, const std::string& path);
void save_qrels(const QrelSet& qrels, const std::string& path);

// Checks qrels ids against corpus/queries and synthetic-query provenance.
// Throws BundleValidationError on the first dangling reference.
void validate_bundle(const DatasetBundle& bundle);

// Uniform sample of min(n, |corpus|) distinct documents, without replacement.
// Deterministic for a given seed (partial Fisher-Yates, see Rng).
std::vector<Document> sample_documents(const Corpus& corpus, size_t n,
                                       uint64_t seed);

}  // namespace garboost
