#include "garboost/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

using nlohmann::json;

namespace {

class SectionReader {
 public:
  SectionReader(const json& j, std::string prefix)
      : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_ + ": expected an object");
  }

  ~SectionReader() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(prefix_ + "." + key + ": wrong value type");
    }
  }

  void get_string_choice(const char* key, const std::vector<std::string>& choices,
                         std::string& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    std::string v;
    try {
      v = j_.at(key).get<std::string>();
    } catch (const json::exception&) {
      throw ConfigError(prefix_ + "." + key + ": expected a string");
    }
    for (const auto& c : choices) {
      if (v == c) {
        out = v;
        return;
      }
    }
    throw ConfigError(prefix_ + "." + key + ": unknown value \"" + v + "\"");
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) {
        throw ConfigError(prefix_ + ": unknown key \"" + key + "\"");
      }
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  SectionReader top(root, "config");

  if (const json* b = top.sub("backend")) {
    SectionReader r(*b, "backend");
    std::string kind = "toy";
    r.get_string_choice("kind", {"toy", "http"}, kind);
    cfg.backend.kind = kind == "http" ? BackendKind::kHttp : BackendKind::kToy;
    r.get("base_url", cfg.backend.base_url);
    r.get("model", cfg.backend.model);
    r.get("embed_model", cfg.backend.embed_model);
    r.get("api_key_env", cfg.backend.api_key_env);
    r.get("embed_dim", cfg.backend.embed_dim);
    r.get("timeout_seconds", cfg.backend.timeout_seconds);
    r.get("max_retries", cfg.backend.max_retries);
    r.get("max_inflight", cfg.backend.max_inflight);
    r.get("cache_dir", cfg.backend.cache_dir);
    r.get("temperature", cfg.backend.temperature);
    r.finish();
  }

  if (const json* t = top.sub("toy")) {
    SectionReader r(*t, "toy");
    r.get("ngram_min", cfg.toy.ngram_min);
    r.get("ngram_max", cfg.toy.ngram_max);
    r.get("feature_dim", cfg.toy.feature_dim);
    r.get("embed_dim", cfg.toy.embed_dim);
    r.get("hash_seed", cfg.toy.hash_seed);
    r.get("init_seed", cfg.toy.init_seed);
    r.get("normalize", cfg.toy.normalize);
    r.get("psi_dim", cfg.toy.psi_dim);
    r.get("projection_seed", cfg.toy.projection_seed);
    r.get("pool_passages", cfg.toy.pool_passages);
    r.get("judge_threshold", cfg.toy.judge_threshold);
    r.finish();
  }

  if (const json* q = top.sub("qgen")) {
    SectionReader r(*q, "qgen");
    r.get("sample_size", cfg.qgen.sample_size);
    r.get("task", cfg.qgen.task);
    r.finish();
  }

  if (const json* g = top.sub("gar")) {
    SectionReader r(*g, "gar");
    r.get("num_hypothetical", cfg.gar.num_hypothetical);
    r.get("alpha0", cfg.gar.alpha0);
    r.finish();
  }

  if (const json* rl = top.sub("rlrf")) {
    SectionReader r(*rl, "rlrf");
    r.get("alpha", cfg.rlrf.alpha);
    r.get("gamma_schedule", cfg.rlrf.gamma_schedule);
    r.get("K", cfg.rlrf.sample_size);
    r.get("beta", cfg.rlrf.dpo.beta);
    r.get("lr", cfg.rlrf.dpo.learning_rate);
    r.get("steps", cfg.rlrf.dpo.steps);
    std::string objective = "dpo";
    r.get_string_choice("objective", {"dpo", "sft"}, objective);
    cfg.rlrf.dpo.objective =
        objective == "sft" ? PolicyObjective::kSft : PolicyObjective::kDpo;
    r.finish();
  }

  if (const json* rg = top.sub("rlgf")) {
    SectionReader r(*rg, "rlgf");
    r.get("alpha0", cfg.rlgf.alpha0);
    r.get("alphai", cfg.rlgf.alphai);
    r.get("tau", cfg.rlgf.tau);
    r.get("lambda_dst", cfg.rlgf.lambda_dst);
    r.get("lr", cfg.rlgf.learning_rate);
    r.get("epochs", cfg.rlgf.epochs);
    r.get("negatives", cfg.rlgf.negatives_per_query);
    std::vector<size_t> window = {cfg.rlgf.neg_window_lo, cfg.rlgf.neg_window_hi};
    r.get("neg_window", window);
    check(window.size() == 2, "rlgf.neg_window: expected [lo, hi]");
    cfg.rlgf.neg_window_lo = window[0];
    cfg.rlgf.neg_window_hi = window[1];
    r.get("N", cfg.rlgf.rank_list_size);
    r.finish();
  }

  if (const json* bo = top.sub("boost")) {
    SectionReader r(*bo, "boost");
    r.get("subsets", cfg.boost.subsets);
    r.get("seed", cfg.boost.seed);
    r.get("heldout_fraction", cfg.boost.heldout_fraction);
    r.get("global_reference", cfg.boost.global_reference);
    if (const json* ab = r.sub("ablations")) {
      SectionReader a(*ab, "boost.ablations");
      a.get("use_dpo", cfg.boost.ablations.use_dpo);
      a.get("distillation", cfg.boost.ablations.distillation);
      a.get("proximity", cfg.boost.ablations.proximity);
      a.get("filter_rule1", cfg.boost.ablations.filter_rule1);
      a.get("filter_rule2", cfg.boost.ablations.filter_rule2);
      a.finish();
    }
    r.finish();
  }

  if (const json* ev = top.sub("eval")) {
    SectionReader r(*ev, "eval");
    r.get("k", cfg.eval.k);
    std::string gain = "exponential";
    r.get_string_choice("gain", {"exponential", "linear"}, gain);
    cfg.eval.gain = gain == "linear" ? GainKind::kLinear : GainKind::kExponential;
    r.get("exclude_unjudged", cfg.eval.exclude_queries_without_relevant);
    r.finish();
  }

  top.finish();

  // Range checks.
  check(cfg.toy.ngram_min >= 1 && cfg.toy.ngram_min <= cfg.toy.ngram_max,
        "toy: require 1 <= ngram_min <= ngram_max");
  check(cfg.toy.feature_dim > 0, "toy.feature_dim must be positive");
  check(cfg.toy.embed_dim > 0, "toy.embed_dim must be positive");
  check(cfg.toy.psi_dim > 0, "toy.psi_dim must be positive");
  check(cfg.gar.alpha0 > 0.0 && cfg.gar.alpha0 < 1.0, "gar.alpha0 must lie in (0, 1)");
  check(cfg.rlrf.alpha > 0.0 && cfg.rlrf.alpha < 1.0, "rlrf.alpha must lie in (0, 1)");
  for (double g : cfg.rlrf.gamma_schedule) {
    check(g > 1.0, "rlrf.gamma_schedule entries must exceed 1");
  }
  check(cfg.rlrf.sample_size >= 2, "rlrf.K must be >= 2");
  check(cfg.rlrf.dpo.beta > 0.0, "rlrf.beta must be positive");
  check(cfg.rlrf.dpo.learning_rate > 0.0, "rlrf.lr must be positive");
  check(cfg.rlgf.tau > 0.0, "rlgf.tau must be positive");
  check(cfg.rlgf.lambda_dst >= 0.0, "rlgf.lambda_dst must be non-negative");
  check(cfg.rlgf.learning_rate > 0.0, "rlgf.lr must be positive");
  check(cfg.rlgf.rank_list_size >= 1, "rlgf.N must be >= 1");
  check(cfg.rlgf.neg_window_lo >= 1 && cfg.rlgf.neg_window_lo <= cfg.rlgf.neg_window_hi,
        "rlgf.neg_window: require 1 <= lo <= hi");
  check(cfg.boost.subsets >= 1, "boost.subsets must be >= 1");
  check(cfg.boost.heldout_fraction >= 0.0 && cfg.boost.heldout_fraction < 1.0,
        "boost.heldout_fraction must lie in [0, 1)");
  check(cfg.eval.k >= 1, "eval.k must be >= 1");
  check(cfg.backend.max_inflight >= 1, "backend.max_inflight must be >= 1");
  check(cfg.rlrf.gamma_schedule.size() == cfg.boost.subsets,
        "rlrf.gamma_schedule must have one entry per boost subset");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json root;
  root["backend"] = {
      {"kind", cfg.backend.kind == BackendKind::kHttp ? "http" : "toy"},
      {"base_url", cfg.backend.base_url},
      {"model", cfg.backend.model},
      {"embed_model", cfg.backend.embed_model},
      {"api_key_env", cfg.backend.api_key_env},
      {"embed_dim", cfg.backend.embed_dim},
      {"timeout_seconds", cfg.backend.timeout_seconds},
      {"max_retries", cfg.backend.max_retries},
      {"max_inflight", cfg.backend.max_inflight},
      {"cache_dir", cfg.backend.cache_dir},
      {"temperature", cfg.backend.temperature}};
  root["toy"] = {{"ngram_min", cfg.toy.ngram_min},
                 {"ngram_max", cfg.toy.ngram_max},
                 {"feature_dim", cfg.toy.feature_dim},
                 {"embed_dim", cfg.toy.embed_dim},
                 {"hash_seed", cfg.toy.hash_seed},
                 {"init_seed", cfg.toy.init_seed},
                 {"normalize", cfg.toy.normalize},
                 {"psi_dim", cfg.toy.psi_dim},
                 {"projection_seed", cfg.toy.projection_seed},
                 {"pool_passages", cfg.toy.pool_passages},
                 {"judge_threshold", cfg.toy.judge_threshold}};
  root["qgen"] = {{"sample_size", cfg.qgen.sample_size}, {"task", cfg.qgen.task}};
  root["gar"] = {{"num_hypothetical", cfg.gar.num_hypothetical},
                 {"alpha0", cfg.gar.alpha0}};
  root["rlrf"] = {
      {"alpha", cfg.rlrf.alpha},
      {"gamma_schedule", cfg.rlrf.gamma_schedule},
      {"K", cfg.rlrf.sample_size},
      {"beta", cfg.rlrf.dpo.beta},
      {"lr", cfg.rlrf.dpo.learning_rate},
      {"steps", cfg.rlrf.dpo.steps},
      {"objective",
       cfg.rlrf.dpo.objective == PolicyObjective::kSft ? "sft" : "dpo"}};
  root["rlgf"] = {{"alpha0", cfg.rlgf.alpha0},
                  {"alphai", cfg.rlgf.alphai},
                  {"tau", cfg.rlgf.tau},
                  {"lambda_dst", cfg.rlgf.lambda_dst},
                  {"lr", cfg.rlgf.learning_rate},
                  {"epochs", cfg.rlgf.epochs},
                  {"negatives", cfg.rlgf.negatives_per_query},
                  {"neg_window",
                   std::vector<size_t>{cfg.rlgf.neg_window_lo, cfg.rlgf.neg_window_hi}},
                  {"N", cfg.rlgf.rank_list_size}};
  root["boost"] = {{"subsets", cfg.boost.subsets},
                   {"seed", cfg.boost.seed},
                   {"heldout_fraction", cfg.boost.heldout_fraction},
                   {"global_reference", cfg.boost.global_reference},
                   {"ablations",
                    {{"use_dpo", cfg.boost.ablations.use_dpo},
                     {"distillation", cfg.boost.ablations.distillation},
                     {"proximity", cfg.boost.ablations.proximity},
                     {"filter_rule1", cfg.boost.ablations.filter_rule1},
                     {"filter_rule2", cfg.boost.ablations.filter_rule2}}}};
  root["eval"] = {
      {"k", cfg.eval.k},
      {"gain", cfg.eval.gain == GainKind::kLinear ? "linear" : "exponential"},
      {"exclude_unjudged", cfg.eval.exclude_queries_without_relevant}};
  return root.dump(2) + "\n";
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write config: " + path);
  out << config_to_json(cfg);
}

uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a64(config_to_json(cfg));
}

ToyBackendConfig make_toy_backend_config(const RunConfig& cfg) {
  ToyBackendConfig out;
  out.embedder.hasher.ngram_min = cfg.toy.ngram_min;
  out.embedder.hasher.ngram_max = cfg.toy.ngram_max;
  out.embedder.hasher.dim = cfg.toy.feature_dim;
  out.embedder.hasher.hash_seed = cfg.toy.hash_seed;
  out.embedder.dim_embed = cfg.toy.embed_dim;
  out.embedder.init_seed = cfg.toy.init_seed;
  out.embedder.normalize = cfg.toy.normalize;
  out.psi_dim = cfg.toy.psi_dim;
  out.projection_seed = cfg.toy.projection_seed;
  out.pool_passages = cfg.toy.pool_passages;
  out.judge_threshold = cfg.toy.judge_threshold;
  return out;
}

HttpConfig make_http_config(const RunConfig& cfg) {
  HttpConfig out;
  out.base_url = cfg.backend.base_url;
  out.model = cfg.backend.model;
  out.embed_model = cfg.backend.embed_model;
  out.api_key_env = cfg.backend.api_key_env;
  out.embed_dim = cfg.backend.embed_dim;
  out.timeout_seconds = cfg.backend.timeout_seconds;
  out.max_retries = cfg.backend.max_retries;
  out.max_inflight = cfg.backend.max_inflight;
  out.cache_dir = cfg.backend.cache_dir;
  out.temperature = cfg.backend.temperature;
  return out;
}

GarRetrieveConfig make_gar_config(const RunConfig& cfg, const std::string& task,
                                  uint64_t seed) {
  GarRetrieveConfig out;
  out.num_hypothetical = cfg.gar.num_hypothetical;
  out.alpha0 = cfg.gar.alpha0;
  out.k = cfg.eval.k;
  out.seed = seed;
  out.task = task;
  return out;
}

}  // namespace garboost
