#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "garboost/backend.hpp"
#include "garboost/call_cache.hpp"

namespace garboost {

struct HttpConfig {
  std::string base_url = "http://localhost:8080/v1";
  std::string model = "gpt-4o-mini";
  std::string embed_model = "text-embedding-3-small";
  std::string api_key_env = "GARBOOST_API_KEY";  // bearer token source
  uint32_t embed_dim = 1536;
  double timeout_seconds = 60.0;
  size_t max_retries = 3;
  size_t max_inflight = 4;  // bounded request parallelism
  std::string cache_dir = "cache";
  double temperature = 0.7;  // hypothetical-doc sampling temperature
};

// Shared OpenAI-compatible transport: POST {base_url}/chat/completions and
// {base_url}/embeddings with bearer auth, exponential backoff with jitter,
// and the disk call cache in front of every request.
class HttpClientCore;

class HttpRetriever : public Retriever {
 public:
  HttpRetriever(HttpConfig cfg, std::shared_ptr<HttpClientCore> core);

  EmbedBatchResult embed_batch(const std::vector<std::string>& texts) override;
  uint32_t dim() const override { return cfg_.embed_dim; }
  bool normalized() const override { return false; }
  uint64_t fingerprint() const override;

 private:
  HttpConfig cfg_;
  std::shared_ptr<HttpClientCore> core_;
};

class HttpGenerator : public Generator {
 public:
  HttpGenerator(HttpConfig cfg, std::shared_ptr<HttpClientCore> core);

  GeneratorCapabilities capabilities() const override;

  HypotheticalBatch generate_hypothetical(const std::string& query,
                                          const std::string& task, size_t k,
                                          uint64_t seed) override;
  std::string synthesize_query(const Document& doc,
                               const std::string& task) override;
  bool judge_pair(const std::string& task, const std::string& query,
                  const std::string& doc_text) override;

 protected:
  std::vector<std::string> rank_docs_impl(
      const std::string& query, const std::vector<ScoredDoc>& docs) override;

 private:
  HttpConfig cfg_;
  std::shared_ptr<HttpClientCore> core_;
};

struct HttpBackend {
  std::shared_ptr<HttpClientCore> core;
  std::unique_ptr<HttpRetriever> retriever;
  std::unique_ptr<HttpGenerator> generator;

  const CallCache& cache() const;
};

HttpBackend make_http_backend(const HttpConfig& cfg);

// Parses a ranking completion: "Doc [i]" tokens in order of appearance, which
// must cover 1..n exactly once. Returns 0-based candidate indices. Throws
// RankParseError (with the raw text attached) on partial or invalid coverage.
std::vector<size_t> parse_ranking_response(const std::string& text, size_t n);

}  // namespace garboost
