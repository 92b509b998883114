#include "garboost/selfboost.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"
#include "garboost/gar.hpp"
#include "garboost/rlgf.hpp"
#include "garboost/rlrf.hpp"
#include "garboost/rng.hpp"

namespace garboost {

namespace fs = std::filesystem;
using nlohmann::json;

std::string stage_label(int ret_index, int gen_index) {
  return "Ret: " + std::to_string(ret_index) + ", Gen: " + std::to_string(gen_index);
}

std::string stage_report_record(const StageReport& report) {
  json rec{{"stage", report.label},
           {"ret", report.ret_index},
           {"gen", report.gen_index},
           {"kind", report.kind},
           {"ndcg10", report.ndcg10},
           {"queries", report.queries},
           {"accepted_pairs", report.accepted_pairs},
           {"skipped", report.skipped},
           {"policy_loss", report.policy_loss},
           {"loss_ctr", report.loss_ctr},
           {"loss_dst", report.loss_dst}};
  return rec.dump();
}

SynthesizedSet synthesize_training_set(const Corpus& corpus, Generator& generator,
                                       size_t n, const std::string& task,
                                       uint64_t seed) {
  if (n < 1) throw Error("synthesize_training_set: n must be >= 1");
  SynthesizedSet out;
  for (const auto& doc : sample_documents(corpus, n, seed)) {
    std::string text;
    try {
      text = generator.synthesize_query(doc, task);
    } catch (const NoExtractableQuery&) {
      ++out.rejected;
      continue;
    } catch (const GenerationEmpty&) {
      ++out.rejected;
      continue;
    }
    if (!generator.judge_pair(task, text, doc.embedding_text())) {
      ++out.rejected;
      continue;
    }
    Query q;
    q.id = "syn-" + doc.id;
    q.text = std::move(text);
    q.source = QuerySource::kSynthetic;
    q.provenance_doc = doc.id;
    out.qrels.judgments[q.id][doc.id] = 1;
    out.queries.push_back(std::move(q));
  }
  if (out.queries.empty()) {
    throw EmptyTrainingSet("quality control rejected every synthesized query");
  }
  return out;
}

EvalOutput evaluate_mode(EvalMode mode, const std::vector<Query>& queries,
                         const QrelSet& qrels, const DenseIndex& index,
                         Retriever& retriever, Generator* generator,
                         const GarRetrieveConfig& gar_cfg, const EvalOptions& opts,
                         uint64_t master_seed) {
  if (index.fingerprint() != retriever.fingerprint()) {
    throw FingerprintMismatch("evaluate: index does not match retriever params");
  }
  if (mode == EvalMode::kGar && gar_cfg.num_hypothetical > 0 && !generator) {
    throw Error("evaluate: gar mode requires a generator");
  }
  auto retrieve = [&](const Query& q) -> std::vector<SearchHit> {
    if (mode == EvalMode::kBase || gar_cfg.num_hypothetical == 0) {
      auto v = retriever.embed_one(q.text);
      return index.search(v.vector, opts.k);
    }
    GarRetrieveConfig per_query = gar_cfg;
    per_query.k = opts.k;
    per_query.seed = derive_seed(master_seed, "eval", fnv1a64(q.id));
    return gar_retrieve(q.id, q.text, index, retriever, *generator, per_query).hits;
  };
  return evaluate_rankings(queries, qrels, retrieve, opts);
}

// --- SelfBoost ----------------------------------------------------------------

SelfBoost::SelfBoost(const RunConfig& cfg, const Corpus& corpus, BoostInputs inputs,
                     std::string run_dir)
    : cfg_(cfg),
      corpus_(&corpus),
      inputs_(std::move(inputs)),
      run_dir_(std::move(run_dir)) {
  if (cfg_.backend.kind != BackendKind::kToy) {
    throw ConfigError("self-boosting drives the in-process toy backend; "
                      "use the export/eval commands with http backends");
  }
  if (inputs_.train_queries.empty()) throw Error("selfboost: no training queries");
  if (inputs_.train_queries.size() < cfg_.boost.subsets) {
    throw Error("selfboost: fewer training queries than subsets");
  }

  std::set<std::string> train_ids;
  for (const auto& q : inputs_.train_queries) train_ids.insert(q.id);
  for (const auto& q : inputs_.heldout_queries) {
    if (train_ids.count(q.id)) {
      throw Error("selfboost: query " + q.id + " appears in both splits");
    }
  }

  backend_ = std::make_unique<ToyBackend>(make_toy_backend_config(cfg_), corpus);

  fs::create_directories(run_dir_);
  fs::create_directories(fs::path(run_dir_) / "checkpoints");
  fs::create_directories(fs::path(run_dir_) / "rankings");
  fs::create_directories(fs::path(run_dir_) / "dpo_pairs");
}

const Document& SelfBoost::resolve_dstar(const Query& query) const {
  if (query.provenance_doc) {
    const Document* doc = corpus_->find(*query.provenance_doc);
    if (!doc) throw Error("query " + query.id + " has dangling provenance doc");
    return *doc;
  }
  const auto* judgments = inputs_.train_qrels.for_query(query.id);
  if (judgments) {
    const Document* best = nullptr;
    int best_grade = 0;
    for (const auto& [doc_id, grade] : *judgments) {
      if (grade > best_grade) {
        if (const Document* doc = corpus_->find(doc_id)) {
          best = doc;
          best_grade = grade;
        }
      }
    }
    if (best) return *best;
  }
  throw Error("query " + query.id + " has no gold document (provenance or qrels)");
}

void SelfBoost::rebuild_index() {
  index_ = DenseIndex::build(*corpus_, backend_->retriever());
}

double SelfBoost::evaluate_heldout() {
  GarRetrieveConfig gar_cfg =
      make_gar_config(cfg_, cfg_.qgen.task, /*seed=*/0);
  EvalOptions opts;
  opts.k = cfg_.eval.k;
  opts.gain = cfg_.eval.gain;
  opts.exclude_queries_without_relevant = cfg_.eval.exclude_queries_without_relevant;
  auto out = evaluate_mode(EvalMode::kGar, inputs_.heldout_queries,
                           inputs_.heldout_qrels, index_, backend_->retriever(),
                           &backend_->generator(), gar_cfg, opts, cfg_.boost.seed);
  write_rankings(stage_counter_, out.rankings);
  return out.ndcg.macro_average;
}

const std::vector<std::vector<Query>>& SelfBoost::subsets() {
  if (!subsets_ready_) {
    std::vector<Query> shuffled = inputs_.train_queries;
    Rng rng(derive_seed(cfg_.boost.seed, "partition"));
    rng.shuffle(shuffled);
    const size_t s = cfg_.boost.subsets;
    const size_t base = shuffled.size() / s;
    const size_t extra = shuffled.size() % s;
    size_t cursor = 0;
    subsets_.clear();
    for (size_t i = 0; i < s; ++i) {
      const size_t len = base + (i < extra ? 1 : 0);
      subsets_.emplace_back(shuffled.begin() + cursor,
                            shuffled.begin() + cursor + len);
      cursor += len;
    }
    subsets_ready_ = true;
  }
  return subsets_;
}

void SelfBoost::write_report(const StageReport& report) {
  {
    std::ofstream out(fs::path(run_dir_) / "reports.jsonl", std::ios::app);
    if (!out) throw IoError("cannot append report in " + run_dir_);
    out << stage_report_record(report) << '\n';
  }
  {
    std::ofstream out(fs::path(run_dir_) / "timings.jsonl", std::ios::app);
    json rec{{"stage", report.label},
             {"wall_clock_seconds", report.wall_clock_seconds}};
    out << rec.dump() << '\n';
  }
  std::cerr << report.label << "  nDCG@10=" << report.ndcg10 * 100.0
            << "  (" << report.kind << ")\n";
}

void SelfBoost::write_checkpoint_for_stage(size_t stage_counter,
                                           const std::string& label) {
  char name[32];
  std::snprintf(name, sizeof(name), "stage_%02u.ckpt", static_cast<unsigned>(stage_counter));
  save_boost_checkpoint((fs::path(run_dir_) / "checkpoints" / name).string(), cfg_,
                        backend_->embedder(), backend_->policy(),
                        completed_iterations_, label);
}

void SelfBoost::write_rankings(size_t stage_counter,
                               const std::vector<PerQueryRanking>& rankings) {
  char name[32];
  std::snprintf(name, sizeof(name), "stage_%02u.jsonl", static_cast<unsigned>(stage_counter));
  save_rankings(rankings, (fs::path(run_dir_) / "rankings" / name).string());
}

StageReport SelfBoost::initialize() {
  const auto t0 = std::chrono::steady_clock::now();

  // Fresh report/trace files; config snapshot for reproducibility.
  save_config(cfg_, (fs::path(run_dir_) / "config.json").string());
  for (const char* f : {"reports.jsonl", "timings.jsonl", "trace_rlrf.jsonl",
                        "trace_rlgf.jsonl"}) {
    std::ofstream(fs::path(run_dir_) / f, std::ios::trunc);
  }

  rebuild_index();
  if (cfg_.boost.global_reference) {
    backend_->policy().freeze_reference();
    reference_frozen_once_ = true;
  }

  StageReport report;
  report.ret_index = 0;
  report.gen_index = 0;
  report.label = stage_label(0, 0);
  report.kind = "base";
  stage_counter_ = 0;
  completed_iterations_ = 0;
  report.ndcg10 = evaluate_heldout();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_report(report);
  write_checkpoint_for_stage(0, report.label);
  return report;
}

StageReport SelfBoost::run_rlrf_stage(const std::vector<Query>& subset, double gamma,
                                      size_t iteration) {
  if (subset.empty()) throw Error("run_rlrf_stage: empty query subset");
  const auto t0 = std::chrono::steady_clock::now();
  const auto& toggles = cfg_.boost.ablations;

  if (!cfg_.boost.global_reference) {
    backend_->policy().freeze_reference();
  }

  std::vector<PreferencePair> pairs;
  PoolMap pools;
  size_t skipped = 0;
  for (const auto& query : subset) {
    const Document& dstar = resolve_dstar(query);
    const uint64_t seed =
        derive_seed(cfg_.boost.seed, "rlrf-hyp", iteration, fnv1a64(query.id));
    auto batch = backend_->generator().generate_hypothetical(
        query.text, cfg_.qgen.task, cfg_.rlrf.sample_size, seed);
    HypotheticalScores scores;
    try {
      scores = score_hypotheticals(query.text, batch.texts,
                                   dstar.embedding_text(),
                                   backend_->retriever(), cfg_.rlrf.alpha);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    if (scores.candidates.size() < 2) {
      ++skipped;
      continue;
    }
    auto [winner, loser] = select_extremes(scores);
    const FilterDecision decision =
        apply_filter(winner.score, loser.score, scores.query_score, gamma);
    const bool accepted = (!toggles.filter_rule1 || decision.rule1_ok) &&
                          (!toggles.filter_rule2 || decision.rule2_ok);
    if (!accepted) continue;

    PreferencePair pair;
    pair.query_id = query.id;
    pair.query_text = query.text;
    pair.winning_text = winner.text;
    pair.losing_text = loser.text;
    pair.score_win = winner.score;
    pair.score_lose = loser.score;
    pair.score_query = scores.query_score;
    pair.gamma = gamma;
    pairs.push_back(std::move(pair));
    pools.emplace(query.id, &backend_->pool(query.text));
  }

  StageReport report;
  report.ret_index = static_cast<int>(iteration) - 1;
  report.gen_index = static_cast<int>(iteration);
  report.label = stage_label(report.ret_index, report.gen_index);
  report.kind = "rlrf";
  report.queries = subset.size();
  report.accepted_pairs = pairs.size();
  report.skipped = skipped;

  char export_name[32];
  std::snprintf(export_name, sizeof(export_name), "stage_%u.jsonl", static_cast<unsigned>(iteration));
  export_pairs(pairs, cfg_.qgen.task,
               (fs::path(run_dir_) / "dpo_pairs" / export_name).string());

  if (pairs.empty()) {
    std::cerr << "warning: " << report.label
              << ": no pairs survived filtering, generator stage is a no-op\n";
  } else {
    DpoConfig dpo = cfg_.rlrf.dpo;
    if (!toggles.use_dpo) dpo.objective = PolicyObjective::kSft;
    auto trained = train_policy(backend_->policy(), pairs, pools, dpo);
    report.policy_loss = trained.loss_trace.back();
    std::ofstream trace(fs::path(run_dir_) / "trace_rlrf.jsonl", std::ios::app);
    for (size_t step = 0; step < trained.loss_trace.size(); ++step) {
      json rec{{"stage", report.label},
               {"step", step},
               {"loss", trained.loss_trace[step]},
               {"lr", dpo.learning_rate}};
      trace << rec.dump() << '\n';
    }
  }

  ++stage_counter_;
  report.ndcg10 = evaluate_heldout();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_report(report);
  write_checkpoint_for_stage(stage_counter_, report.label);
  return report;
}

StageReport SelfBoost::run_rlgf_stage(const std::vector<Query>& subset,
                                      size_t iteration) {
  if (subset.empty()) throw Error("run_rlgf_stage: empty query subset");
  const auto t0 = std::chrono::steady_clock::now();
  const auto& toggles = cfg_.boost.ablations;

  RlgfConfig rlgf_cfg = cfg_.rlgf;
  rlgf_cfg.distillation = rlgf_cfg.distillation && toggles.distillation;
  rlgf_cfg.proximity = rlgf_cfg.proximity && toggles.proximity;

  std::vector<TrainExample> examples;
  size_t skipped = 0;
  for (const auto& query : subset) {
    const Document& dstar = resolve_dstar(query);
    TrainExample ex;
    ex.query_id = query.id;
    ex.query_text = query.text;
    ex.dstar = {dstar.id, dstar.embedding_text()};

    const uint64_t hyp_seed =
        derive_seed(cfg_.boost.seed, "rlgf-hyp", iteration, fnv1a64(query.id));
    auto batch = backend_->generator().generate_hypothetical(
        query.text, cfg_.qgen.task, cfg_.rlrf.sample_size, hyp_seed);
    std::set<std::string> seen_hyps;
    for (auto& text : batch.texts) {
      if (text == ex.dstar.text) continue;
      if (seen_hyps.insert(text).second) ex.hyp_texts.push_back(text);
    }

    auto q_embed = backend_->retriever().embed_one(query.text);
    if (q_embed.is_zero) {
      ++skipped;
      continue;
    }
    const uint64_t neg_seed =
        derive_seed(cfg_.boost.seed, "rlgf-neg", iteration, fnv1a64(query.id));
    auto negative_ids = index_.mine_hard_negatives(
        q_embed.vector, {dstar.id}, rlgf_cfg.neg_window_lo, rlgf_cfg.neg_window_hi,
        rlgf_cfg.negatives_per_query, neg_seed);
    for (const auto& id : negative_ids) {
      const Document* doc = corpus_->find(id);
      if (doc) ex.negatives.push_back({doc->id, doc->embedding_text()});
    }

    if (rlgf_cfg.distillation) {
      auto ranked = collect_ranking_feedback(
          backend_->generator(), query.id, query.text, index_,
          backend_->retriever(), dstar, *corpus_, rlgf_cfg.rank_list_size);
      for (const auto& id : ranked.doc_ids) {
        const Document* doc = corpus_->find(id);
        if (doc) ex.ranked.push_back({doc->id, doc->embedding_text()});
      }
    }
    examples.push_back(std::move(ex));
  }

  StageReport report;
  report.ret_index = static_cast<int>(iteration);
  report.gen_index = static_cast<int>(iteration);
  report.label = stage_label(report.ret_index, report.gen_index);
  report.kind = "rlgf";
  report.queries = subset.size();
  report.skipped = skipped;

  if (examples.empty()) {
    std::cerr << "warning: " << report.label
              << ": every query was degenerate, retriever stage is a no-op\n";
  } else {
    auto trained = train_retriever(backend_->embedder(), examples, rlgf_cfg);
    report.loss_ctr = trained.trace.back().loss_ctr;
    report.loss_dst = trained.trace.back().loss_dst;
    std::ofstream trace(fs::path(run_dir_) / "trace_rlgf.jsonl", std::ios::app);
    for (const auto& row : trained.trace) {
      json rec{{"stage", report.label},
               {"step", row.epoch},
               {"loss_ctr", row.loss_ctr},
               {"loss_dst", row.loss_dst},
               {"lr", row.lr}};
      trace << rec.dump() << '\n';
    }
    rebuild_index();
  }

  ++stage_counter_;
  completed_iterations_ = iteration;
  report.ndcg10 = evaluate_heldout();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_report(report);
  write_checkpoint_for_stage(stage_counter_, report.label);
  return report;
}

std::vector<StageReport> SelfBoost::run(size_t resume_from) {
  std::vector<StageReport> reports;
  if (resume_from == 0) {
    reports.push_back(initialize());
  } else {
    if (completed_iterations_ != resume_from) {
      throw CheckpointError("resume: checkpoint holds iteration " +
                            std::to_string(completed_iterations_) +
                            ", requested resume from " + std::to_string(resume_from));
    }
    rebuild_index();
    stage_counter_ = 2 * resume_from;
  }

  const auto& parts = subsets();
  for (size_t i = resume_from + 1; i <= cfg_.boost.subsets; ++i) {
    const double gamma = cfg_.rlrf.gamma_schedule[i - 1];
    reports.push_back(run_rlrf_stage(parts[i - 1], gamma, i));
    reports.push_back(run_rlgf_stage(parts[i - 1], i));
  }
  return reports;
}

void SelfBoost::save_checkpoint(const std::string& path) const {
  save_boost_checkpoint(path, cfg_, backend_->embedder(), backend_->policy(),
                        completed_iterations_,
                        stage_label(static_cast<int>(completed_iterations_),
                                    static_cast<int>(completed_iterations_)));
}

void SelfBoost::load_checkpoint(const std::string& path) {
  auto ckpt = load_boost_checkpoint(path, cfg_);
  backend_->embedder().set_weights(std::move(ckpt.weights));
  backend_->policy().set_theta(std::move(ckpt.theta));
  backend_->policy().set_theta_ref(std::move(ckpt.theta_ref));
  completed_iterations_ = ckpt.completed_iterations;
  stage_counter_ = 2 * completed_iterations_;
  rebuild_index();
}

}  // namespace garboost
