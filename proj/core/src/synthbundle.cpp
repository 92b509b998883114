#include "garboost/synthbundle.hpp"

#include <filesystem>
#include <set>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"
#include "garboost/text.hpp"

namespace garboost {

namespace fs = std::filesystem;

namespace {

// Pronounceable unique words from consonant-vowel syllables.
class WordFactory {
 public:
  explicit WordFactory(uint64_t seed) : rng_(seed) {}

  std::string word(size_t syllables) {
    static const char* kConsonants = "bcdfglmnprstvz";
    static const char* kVowels = "aeiou";
    for (;;) {
      std::string w;
      for (size_t s = 0; s < syllables; ++s) {
        w.push_back(kConsonants[rng_.next_index(14)]);
        w.push_back(kVowels[rng_.next_index(5)]);
        if (rng_.next_double() < 0.25) w.push_back(kConsonants[rng_.next_index(14)]);
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> words(size_t count, size_t syllables) {
    std::vector<std::string> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) out.push_back(word(syllables));
    return out;
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

struct Topic {
  std::vector<std::string> anchors;     // shared by both registers
  std::vector<std::string> doc_vocab;   // document register
  std::vector<std::string> query_vocab;  // query register
};

const std::string& pick(Rng& rng, const std::vector<std::string>& pool) {
  return pool[rng.next_index(pool.size())];
}

}  // namespace

SynthBundle make_synth_bundle(const SynthBundleConfig& cfg) {
  if (cfg.topics == 0 || cfg.docs_per_topic == 0) {
    throw Error("synth bundle: topics and docs_per_topic must be positive");
  }
  const size_t total_docs = cfg.topics * cfg.docs_per_topic;
  if (cfg.train_queries + cfg.heldout_queries > total_docs) {
    throw Error("synth bundle: more queries than documents to target");
  }

  WordFactory factory(derive_seed(cfg.seed, "vocab"));
  const auto filler = factory.words(30, 2);
  std::vector<Topic> topics(cfg.topics);
  for (auto& t : topics) {
    t.anchors = factory.words(6, 3);
    t.doc_vocab = factory.words(24, 3);
    t.query_vocab = factory.words(12, 3);
  }
  // Entity words are unique per document and appear in both registers.
  std::vector<std::vector<std::string>> entities(total_docs);
  for (auto& e : entities) e = factory.words(2, 3);

  SynthBundle bundle;
  Rng doc_rng(derive_seed(cfg.seed, "docs"));
  const auto& stop = stopwords();

  for (size_t t = 0; t < cfg.topics; ++t) {
    for (size_t j = 0; j < cfg.docs_per_topic; ++j) {
      const size_t doc_index = t * cfg.docs_per_topic + j;
      const Topic& topic = topics[t];
      const auto& entity = entities[doc_index];

      Document doc;
      char id[16];
      std::snprintf(id, sizeof(id), "d%04u", static_cast<unsigned>(doc_index));
      doc.id = id;
      doc.title = pick(doc_rng, topic.anchors) + " " + entity[0] + " " +
                  pick(doc_rng, topic.doc_vocab);

      std::string body;
      for (size_t s = 0; s < 4; ++s) {
        const size_t len = 9 + doc_rng.next_index(4);  // 9..12 words
        for (size_t w = 0; w < len; ++w) {
          const double u = doc_rng.next_double();
          const std::string* word = nullptr;
          if (u < 0.50) {
            word = &pick(doc_rng, topic.doc_vocab);
          } else if (u < 0.62) {
            word = &pick(doc_rng, topic.anchors);
          } else if (u < 0.74) {
            word = &entity[doc_rng.next_index(2)];
          } else if (u < 0.87) {
            word = &filler[doc_rng.next_index(filler.size())];
          } else {
            word = &stop[doc_rng.next_index(stop.size())];
          }
          if (w > 0) body += ' ';
          body += *word;
        }
        body += ". ";
      }
      while (!body.empty() && body.back() == ' ') body.pop_back();
      doc.text = body;
      bundle.corpus.docs.push_back(std::move(doc));
    }
  }

  // Disjoint target documents for the training and held-out query sets.
  Rng target_rng(derive_seed(cfg.seed, "targets"));
  auto targets = target_rng.sample_without_replacement(
      total_docs, cfg.train_queries + cfg.heldout_queries);

  Rng query_rng(derive_seed(cfg.seed, "queries"));
  auto make_query = [&](size_t doc_index, const std::string& qid) {
    const size_t t = doc_index / cfg.docs_per_topic;
    const Topic& topic = topics[t];
    const auto& entity = entities[doc_index];

    std::vector<std::string> words;
    words.push_back(entity[0]);
    if (query_rng.next_double() < 0.5) words.push_back(entity[1]);
    words.push_back(pick(query_rng, topic.anchors));
    const size_t n_qvocab = 2 + query_rng.next_index(2);  // 2..3
    for (size_t i = 0; i < n_qvocab; ++i) {
      words.push_back(pick(query_rng, topic.query_vocab));
    }
    const size_t n_stop = 1 + query_rng.next_index(2);  // 1..2
    for (size_t i = 0; i < n_stop; ++i) {
      words.push_back(stop[query_rng.next_index(stop.size())]);
    }
    query_rng.shuffle(words);

    Query q;
    q.id = qid;
    for (size_t i = 0; i < words.size(); ++i) {
      if (i > 0) q.text += ' ';
      q.text += words[i];
    }
    q.source = QuerySource::kSynthetic;
    q.provenance_doc = bundle.corpus.docs[doc_index].id;
    return q;
  };

  char qid[16];
  for (size_t i = 0; i < cfg.train_queries; ++i) {
    std::snprintf(qid, sizeof(qid), "tq%04u", static_cast<unsigned>(i));
    Query q = make_query(targets[i], qid);
    bundle.train_qrels.judgments[q.id][*q.provenance_doc] = 1;
    bundle.train_queries.push_back(std::move(q));
  }
  for (size_t i = 0; i < cfg.heldout_queries; ++i) {
    std::snprintf(qid, sizeof(qid), "hq%04u", static_cast<unsigned>(i));
    Query q = make_query(targets[cfg.train_queries + i], qid);
    bundle.heldout_qrels.judgments[q.id][*q.provenance_doc] = 1;
    bundle.heldout_queries.push_back(std::move(q));
  }
  return bundle;
}

void save_synth_bundle(const SynthBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  save_corpus(bundle.corpus, (base / "corpus.jsonl").string());
  save_queries(bundle.train_queries, (base / "queries_train.jsonl").string());
  save_qrels(bundle.train_qrels, (base / "qrels_train.tsv").string());
  save_queries(bundle.heldout_queries, (base / "queries_heldout.jsonl").string());
  save_qrels(bundle.heldout_qrels, (base / "qrels_heldout.tsv").string());
}

SynthBundle load_synth_bundle(const std::string& dir) {
  const fs::path base(dir);
  SynthBundle bundle;
  bundle.corpus = load_corpus((base / "corpus.jsonl").string());
  bundle.train_queries = load_queries((base / "queries_train.jsonl").string());
  bundle.train_qrels = load_qrels((base / "qrels_train.tsv").string());
  bundle.heldout_queries = load_queries((base / "queries_heldout.jsonl").string());
  bundle.heldout_qrels = load_qrels((base / "qrels_heldout.tsv").string());
  return bundle;
}

}  // namespace garboost
