#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "garboost/config.hpp"
#include "garboost/corpus.hpp"
#include "garboost/dense_index.hpp"
#include "garboost/metrics.hpp"
#include "garboost/toy_backend.hpp"

namespace garboost {

struct StageReport {
  int ret_index = 0;
  int gen_index = 0;
  std::string label;   // "Ret: i, Gen: j"
  std::string kind;    // "base" | "rlrf" | "rlgf"
  double ndcg10 = 0.0;  // held-out, GAR mode with the current models
  size_t queries = 0;   // queries processed by the stage
  size_t accepted_pairs = 0;
  size_t skipped = 0;
  double policy_loss = 0.0;  // final batch loss on the stage's pairs
  double loss_ctr = 0.0;
  double loss_dst = 0.0;
  double wall_clock_seconds = 0.0;  // volatile; kept out of the report file
};

std::string stage_label(int ret_index, int gen_index);

// Serialized report record (wall clock excluded so reruns are byte-identical).
std::string stage_report_record(const StageReport& report);

struct SynthesizedSet {
  std::vector<Query> queries;  // source = synthetic, provenance_doc = d*
  QrelSet qrels;               // grade 1 on (query, d*)
  size_t rejected = 0;
};

// QGen with quality control: sample n docs, synthesize one query per doc and
// keep only the ones the judge accepts. Throws EmptyTrainingSet if nothing
// survives.
SynthesizedSet synthesize_training_set(const Corpus& corpus, Generator& generator,
                                       size_t n, const std::string& task,
                                       uint64_t seed);

enum class EvalMode { kBase, kGar };

// Mode dispatcher for retrieval evaluation. kGar samples hypothetical docs
// with a per-query seed derived from master_seed, so reruns are identical.
EvalOutput evaluate_mode(EvalMode mode, const std::vector<Query>& queries,
                         const QrelSet& qrels, const DenseIndex& index,
                         Retriever& retriever, Generator* generator,
                         const GarRetrieveConfig& gar_cfg, const EvalOptions& opts,
                         uint64_t master_seed);

struct BoostInputs {
  std::vector<Query> train_queries;
  QrelSet train_qrels;
  std::vector<Query> heldout_queries;
  QrelSet heldout_qrels;
};

// Orchestrates the alternating schedule over a toy backend: partitions the
// training queries into S subsets and runs one generator stage (RLRF) and one
// retriever stage (RLGF) per subset, evaluating held-out nDCG@10 and writing
// reports, checkpoints and pair exports into the run directory.
class SelfBoost {
 public:
  SelfBoost(const RunConfig& cfg, const Corpus& corpus, BoostInputs inputs,
            std::string run_dir);

  // Builds the index and emits the stage-0 (base) report.
  StageReport initialize();

  StageReport run_rlrf_stage(const std::vector<Query>& subset, double gamma,
                             size_t iteration);
  StageReport run_rlgf_stage(const std::vector<Query>& subset, size_t iteration);

  // Full schedule: 2S+1 reports including the base stage. With resume_from >
  // 0, skips iterations up to and including resume_from and returns only the
  // remaining stages' reports (the base report is also skipped).
  std::vector<StageReport> run(size_t resume_from = 0);

  void save_checkpoint(const std::string& path) const;
  void load_checkpoint(const std::string& path);

  double evaluate_heldout();
  const std::vector<std::vector<Query>>& subsets();

  ToyBackend& backend() { return *backend_; }
  const DenseIndex& index() const { return index_; }
  size_t completed_iterations() const { return completed_iterations_; }
  const std::string& run_dir() const { return run_dir_; }

 private:
  const Document& resolve_dstar(const Query& query) const;
  void rebuild_index();
  void write_report(const StageReport& report);
  void write_checkpoint_for_stage(size_t stage_counter, const std::string& label);
  void write_rankings(size_t stage_counter, const std::vector<PerQueryRanking>& r);

  RunConfig cfg_;
  const Corpus* corpus_;
  BoostInputs inputs_;
  std::string run_dir_;
  std::unique_ptr<ToyBackend> backend_;
  DenseIndex index_;
  std::vector<std::vector<Query>> subsets_;
  bool subsets_ready_ = false;
  size_t completed_iterations_ = 0;
  size_t stage_counter_ = 0;
  bool reference_frozen_once_ = false;
};

// Binary parameter checkpoint: header (magic, version, config hash, progress,
// dims, seeds), then row-major f64 W, theta and theta_ref, plus a sidecar
// "<path>.meta.json" carrying the config hash. Loading verifies the hash.
void save_boost_checkpoint(const std::string& path, const RunConfig& cfg,
                           const ToyEmbedder& embedder, const ToyPolicy& policy,
                           size_t completed_iterations, const std::string& label);

struct LoadedCheckpoint {
  Vec weights;
  Vec theta;
  Vec theta_ref;
  size_t completed_iterations = 0;
};

LoadedCheckpoint load_boost_checkpoint(const std::string& path,
                                       const RunConfig& cfg);

}  // namespace garboost
