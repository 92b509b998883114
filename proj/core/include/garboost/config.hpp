#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "garboost/gar.hpp"
#include "garboost/http_backend.hpp"
#include "garboost/metrics.hpp"
#include "garboost/rlgf.hpp"
#include "garboost/rlrf.hpp"
#include "garboost/toy_backend.hpp"

namespace garboost {

enum class BackendKind { kToy, kHttp };

struct BackendSection {
  BackendKind kind = BackendKind::kToy;
  // http settings
  std::string base_url = "http://localhost:8080/v1";
  std::string model = "gpt-4o-mini";
  std::string embed_model = "text-embedding-3-small";
  std::string api_key_env = "GARBOOST_API_KEY";
  uint32_t embed_dim = 1536;
  double timeout_seconds = 60.0;
  size_t max_retries = 3;
  size_t max_inflight = 4;
  std::string cache_dir = "cache";
  double temperature = 0.7;
};

struct ToySection {
  uint32_t ngram_min = 3;
  uint32_t ngram_max = 5;
  uint32_t feature_dim = 4096;
  uint32_t embed_dim = 128;
  uint64_t hash_seed = 0x5eed;
  uint64_t init_seed = 7;
  bool normalize = true;
  uint32_t psi_dim = 256;
  uint64_t projection_seed = 99;
  size_t pool_passages = 32;
  double judge_threshold = 0.5;
};

struct QgenSection {
  size_t sample_size = 400;
  std::string task = "Given a query, retrieve documents that answer the query.";
};

struct GarSection {
  size_t num_hypothetical = 4;  // L at inference time
  double alpha0 = 0.8;          // remaining mass split equally over the L docs
};

struct RlrfSection {
  double alpha = 0.8;  // single-hypothetical combination weight
  std::vector<double> gamma_schedule = {1.05, 1.08, 1.10};
  size_t sample_size = 8;  // K
  DpoConfig dpo;           // beta, lr, steps, objective
};

struct AblationToggles {
  bool use_dpo = true;      // false: supervised fine-tuning on the winner
  bool distillation = true;
  bool proximity = true;
  bool filter_rule1 = true;
  bool filter_rule2 = true;
};

struct BoostSection {
  size_t subsets = 3;  // S
  uint64_t seed = 42;
  double heldout_fraction = 0.25;  // used when the split is not provided
  bool global_reference = false;   // freeze pi' once instead of per stage
  AblationToggles ablations;
};

struct EvalSection {
  size_t k = 10;
  GainKind gain = GainKind::kExponential;
  bool exclude_queries_without_relevant = true;
};

// The rlgf schema section maps one-to-one onto the module's config struct.
using RlgfSection = RlgfConfig;

struct RunConfig {
  BackendSection backend;
  ToySection toy;
  QgenSection qgen;
  GarSection gar;
  RlrfSection rlrf;
  RlgfSection rlgf;
  BoostSection boost;
  EvalSection eval;
};

RunConfig default_config();

// Strict parse: unknown keys at any level are rejected, value ranges checked.
RunConfig parse_config_json(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Canonical (sorted-key) serialization; equal configs serialize identically.
std::string config_to_json(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

// FNV-1a over the canonical serialization; recorded in checkpoints.
uint64_t config_hash(const RunConfig& cfg);

// Section-to-module conversions.
ToyBackendConfig make_toy_backend_config(const RunConfig& cfg);
HttpConfig make_http_config(const RunConfig& cfg);
GarRetrieveConfig make_gar_config(const RunConfig& cfg, const std::string& task,
                                  uint64_t seed);

}  // namespace garboost
