#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "garboost/http_backend.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"
#include "garboost/rlgf.hpp"
#include "garboost/rng.hpp"

namespace garboost {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string host;  // scheme://authority
  std::string path_prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("backend.base_url must include a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

// Owns the httplib client, the retry loop and the call cache; shared between
// the retriever and generator halves of one backend.
class HttpClientCore {
 public:
  explicit HttpClientCore(const HttpConfig& cfg)
      : cfg_(cfg), url_(split_base_url(cfg.base_url)), cache_(cfg.cache_dir) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) {
      api_key_ = key;
    }
  }

  const CallCache& cache() const { return cache_; }
  const HttpConfig& config() const { return cfg_; }

  // POSTs through the cache; `endpoint` is "/chat/completions" or
  // "/embeddings".
  std::string post_json(const std::string& endpoint, const std::string& body) {
    return cache_.cached_call(cfg_.base_url + endpoint, cfg_.model, body,
                              [&] { return transport_post(endpoint, body); });
  }

  // Runs jobs(0..n-1) with at most max_inflight threads; results land at
  // their own index, so downstream consumers see a deterministic order.
  template <typename Fn>
  void parallel_for(size_t n, Fn&& fn) {
    const size_t workers = std::max<size_t>(1, std::min(cfg_.max_inflight, n));
    if (workers == 1) {
      for (size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= n) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  std::string transport_post(const std::string& endpoint, const std::string& body) {
    const std::string path = url_.path_prefix + endpoint;
    std::string last_error;
    for (size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) backoff(attempt);
      httplib::Client client(url_.host);
      client.set_connection_timeout(std::chrono::milliseconds(
          static_cast<int64_t>(cfg_.timeout_seconds * 1000)));
      client.set_read_timeout(std::chrono::milliseconds(
          static_cast<int64_t>(cfg_.timeout_seconds * 1000)));
      httplib::Headers headers;
      if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
      }
      auto res = client.Post(path, headers, body, "application/json");
      if (!res) {
        last_error = "connection error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 408 || res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400) {
        throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                             path + ": " + res->body);
      }
      return res->body;
    }
    throw TransportError("request to " + path + " failed after " +
                         std::to_string(cfg_.max_retries + 1) + " attempts (" +
                         last_error + ")");
  }

  void backoff(size_t attempt) {
    const double base_ms = 250.0 * static_cast<double>(1ULL << (attempt - 1));
    const uint64_t nonce =
        jitter_counter_.fetch_add(1) ^
        static_cast<uint64_t>(
            std::chrono::steady_clock::now().time_since_epoch().count());
    const double jitter =
        static_cast<double>(splitmix64(nonce) >> 11) * 0x1.0p-53;  // [0, 1)
    const auto delay = std::chrono::milliseconds(
        static_cast<int64_t>(base_ms * (0.5 + jitter)));
    std::this_thread::sleep_for(delay);
  }

  HttpConfig cfg_;
  SplitUrl url_;
  CallCache cache_;
  std::string api_key_;
  std::atomic<uint64_t> jitter_counter_{0};
};

// --- retriever ---------------------------------------------------------------

HttpRetriever::HttpRetriever(HttpConfig cfg, std::shared_ptr<HttpClientCore> core)
    : cfg_(std::move(cfg)), core_(std::move(core)) {}

EmbedBatchResult HttpRetriever::embed_batch(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error("embed_batch: no texts");
  EmbedBatchResult out;
  out.rows.resize(texts.size());
  out.zero_flags.assign(texts.size(), false);

  constexpr size_t kChunk = 128;
  for (size_t start = 0; start < texts.size(); start += kChunk) {
    const size_t end = std::min(start + kChunk, texts.size());
    json input = json::array();
    for (size_t i = start; i < end; ++i) input.push_back(texts[i]);
    json body{{"model", cfg_.embed_model},
              {"input", input},
              {"encoding_format", "float"}};
    const std::string response = core_->post_json("/embeddings", body.dump());
    json payload;
    try {
      payload = json::parse(response);
    } catch (const json::parse_error& e) {
      throw TransportError(std::string("embeddings: invalid JSON response: ") +
                           e.what());
    }
    if (!payload.contains("data") || !payload.at("data").is_array() ||
        payload.at("data").size() != end - start) {
      throw TransportError("embeddings: response data size mismatch");
    }
    for (const auto& item : payload.at("data")) {
      const size_t index = start + item.at("index").get<size_t>();
      if (index >= texts.size()) {
        throw TransportError("embeddings: response index out of range");
      }
      const auto& values = item.at("embedding");
      if (values.size() != cfg_.embed_dim) {
        throw DimMismatch("embeddings: endpoint returned width " +
                          std::to_string(values.size()) + ", expected " +
                          std::to_string(cfg_.embed_dim));
      }
      Vec row;
      row.reserve(values.size());
      bool all_zero = true;
      for (const auto& v : values) {
        const double x = v.get<double>();
        if (x != 0.0) all_zero = false;
        row.push_back(x);
      }
      out.zero_flags[index] = all_zero || texts[index].empty();
      out.rows[index] = std::move(row);
    }
  }
  return out;
}

uint64_t HttpRetriever::fingerprint() const {
  uint64_t h = fnv1a64("http-retriever-v1");
  h = fnv1a64(cfg_.base_url, h);
  h = fnv1a64(cfg_.embed_model, h);
  h = splitmix64(h ^ cfg_.embed_dim);
  return h;
}

// --- generator ---------------------------------------------------------------

HttpGenerator::HttpGenerator(HttpConfig cfg, std::shared_ptr<HttpClientCore> core)
    : cfg_(std::move(cfg)), core_(std::move(core)) {}

GeneratorCapabilities HttpGenerator::capabilities() const {
  GeneratorCapabilities caps;
  caps.logprobs = false;  // chat endpoints rarely expose usable likelihoods
  return caps;
}

namespace {

std::string chat_completion(HttpClientCore& core, const std::string& model,
                            const std::string& prompt, double temperature,
                            std::optional<uint64_t> seed) {
  json body{{"model", model},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
            {"temperature", temperature}};
  if (seed) body["seed"] = *seed;
  const std::string response = core.post_json("/chat/completions", body.dump());
  json payload;
  try {
    payload = json::parse(response);
  } catch (const json::parse_error& e) {
    throw TransportError(std::string("chat: invalid JSON response: ") + e.what());
  }
  try {
    return payload.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception&) {
    throw TransportError("chat: response missing choices[0].message.content");
  }
}

}  // namespace

HypotheticalBatch HttpGenerator::generate_hypothetical(const std::string& query,
                                                       const std::string& task,
                                                       size_t k, uint64_t seed) {
  if (k < 1) throw Error("generate_hypothetical: K must be >= 1");
  const std::string prompt = hypothetical_doc_prompt(task, query);

  std::vector<std::string> raw(k);
  core_->parallel_for(k, [&](size_t i) {
    raw[i] = chat_completion(*core_, cfg_.model, prompt, cfg_.temperature,
                             seed + i);
  });

  HypotheticalBatch batch;
  batch.requested = k;
  for (auto& text : raw) {
    std::string t = trim(text);
    if (t.empty()) {
      ++batch.empty_count;
      continue;
    }
    batch.texts.push_back(std::move(t));
  }
  return batch;
}

std::string HttpGenerator::synthesize_query(const Document& doc,
                                            const std::string& task) {
  const std::string out = trim(chat_completion(
      *core_, cfg_.model, query_gen_prompt(task, doc.embedding_text()), 0.0,
      std::nullopt));
  if (out.empty()) {
    throw GenerationEmpty("query synthesis returned an empty completion for doc " +
                          doc.id);
  }
  return out;
}

bool HttpGenerator::judge_pair(const std::string& task, const std::string& query,
                               const std::string& doc_text) {
  const std::string verdict = trim(chat_completion(
      *core_, cfg_.model, judge_prompt(task, query, doc_text), 0.0, std::nullopt));
  if (verdict == "1") return true;
  if (verdict == "0") return false;
  throw JudgeUnparseable(verdict);
}

std::vector<size_t> parse_ranking_response(const std::string& text, size_t n) {
  std::vector<size_t> order;
  std::vector<bool> seen(n, false);
  size_t pos = 0;
  const std::string marker = "Doc [";
  while ((pos = text.find(marker, pos)) != std::string::npos) {
    pos += marker.size();
    size_t value = 0;
    bool any_digit = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      value = value * 10 + static_cast<size_t>(text[pos] - '0');
      any_digit = true;
      ++pos;
    }
    if (!any_digit || pos >= text.size() || text[pos] != ']') continue;
    if (value < 1 || value > n) {
      throw RankParseError(
          "ranking references Doc [" + std::to_string(value) + "] outside 1.." +
              std::to_string(n),
          text);
    }
    if (seen[value - 1]) {
      throw RankParseError("ranking repeats Doc [" + std::to_string(value) + "]",
                           text);
    }
    seen[value - 1] = true;
    order.push_back(value - 1);
  }
  if (order.size() != n) {
    throw RankParseError("ranking covers " + std::to_string(order.size()) +
                             " of " + std::to_string(n) + " documents",
                         text);
  }
  return order;
}

std::vector<std::string> HttpGenerator::rank_docs_impl(
    const std::string& query, const std::vector<ScoredDoc>& docs) {
  if (docs.empty()) throw Error("rank_docs: empty document list");
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  const std::string completion = chat_completion(
      *core_, cfg_.model, build_ranking_prompt(query, texts), 0.0, std::nullopt);
  auto order = parse_ranking_response(completion, docs.size());
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (size_t i : order) ids.push_back(docs[i].id);
  return ids;
}

// --- assembly ----------------------------------------------------------------

const CallCache& HttpBackend::cache() const { return core->cache(); }

HttpBackend make_http_backend(const HttpConfig& cfg) {
  HttpBackend backend;
  backend.core = std::make_shared<HttpClientCore>(cfg);
  backend.retriever = std::make_unique<HttpRetriever>(cfg, backend.core);
  backend.generator = std::make_unique<HttpGenerator>(cfg, backend.core);
  return backend;
}

}  // namespace garboost
