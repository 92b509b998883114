#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garboost/corpus.hpp"

namespace garboost {

// Deterministic desk-scale benchmark: clustered documents written in a
// "document register" and queries written in a "query register". Each topic
// has anchor words shared by both registers, each document two entity words
// that also appear in its queries, so the gold doc is identifiable but the
// registers only partially overlap (systematic vocabulary shift).
struct SynthBundleConfig {
  size_t topics = 40;
  size_t docs_per_topic = 50;
  size_t train_queries = 300;
  size_t heldout_queries = 100;
  uint64_t seed = 2027;
};

struct SynthBundle {
  Corpus corpus;
  std::vector<Query> train_queries;
  QrelSet train_qrels;
  std::vector<Query> heldout_queries;
  QrelSet heldout_qrels;
};

SynthBundle make_synth_bundle(const SynthBundleConfig& cfg);

// Writes corpus.jsonl, queries_train.jsonl, qrels_train.tsv,
// queries_heldout.jsonl and qrels_heldout.tsv into the directory.
void save_synth_bundle(const SynthBundle& bundle, const std::string& dir);

SynthBundle load_synth_bundle(const std::string& dir);

}  // namespace garboost
