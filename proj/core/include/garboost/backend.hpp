#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garboost/corpus.hpp"
#include "garboost/lexical_tools.hpp"
#include "garboost/vecmath.hpp"

namespace garboost {

struct EmbedBatchResult {
  std::vector<Vec> rows;         // row i embeds texts[i]
  std::vector<bool> zero_flags;  // per item: embedding degenerated to zero
};

// Embedding side of a backend (enc).
class Retriever {
 public:
  virtual ~Retriever() = default;

  virtual EmbedBatchResult embed_batch(const std::vector<std::string>& texts) = 0;
  virtual uint32_t dim() const = 0;
  virtual bool normalized() const = 0;
  // Identifies the parameters/config; indexes record it at build time.
  virtual uint64_t fingerprint() const = 0;

  EmbedResult embed_one(const std::string& text);
};

struct GeneratorCapabilities {
  bool hypothetical = true;
  bool query_gen = true;
  bool judge = true;
  bool rank = true;
  bool logprobs = false;  // endpoint returns token log-likelihoods
};

struct HypotheticalBatch {
  std::vector<std::string> texts;  // surviving samples, in sample order
  size_t requested = 0;
  size_t empty_count = 0;  // samples dropped as empty completions
};

// Generation side of a backend (gen): hypothetical docs, query synthesis,
// relevance judging and ranking.
class Generator {
 public:
  virtual ~Generator() = default;

  virtual GeneratorCapabilities capabilities() const = 0;

  virtual HypotheticalBatch generate_hypothetical(const std::string& query,
                                                  const std::string& task,
                                                  size_t k, uint64_t seed) = 0;

  virtual std::string synthesize_query(const Document& doc,
                                       const std::string& task) = 0;

  virtual bool judge_pair(const std::string& task, const std::string& query,
                          const std::string& doc_text) = 0;

  // Returns a permutation of the input ids; verified on every call.
  std::vector<std::string> rank_docs(const std::string& query,
                                     const std::vector<ScoredDoc>& docs);

 protected:
  virtual std::vector<std::string> rank_docs_impl(
      const std::string& query, const std::vector<ScoredDoc>& docs) = 0;
};

// --- prompt templates ---------------------------------------------------------
// Shared by the HTTP backend and the DPO pair export.

std::string hypothetical_doc_prompt(const std::string& task,
                                    const std::string& query);
std::string query_gen_prompt(const std::string& task,
                             const std::string& passage);
std::string judge_prompt(const std::string& task, const std::string& query,
                         const std::string& passage);

}  // namespace garboost
