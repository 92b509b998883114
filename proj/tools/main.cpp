#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "garboost/config.hpp"
#include "garboost/corpus.hpp"
#include "garboost/dense_index.hpp"
#include "garboost/error.hpp"
#include "garboost/gar.hpp"
#include "garboost/rlrf.hpp"
#include "garboost/rng.hpp"
#include "garboost/selfboost.hpp"
#include "garboost/synthbundle.hpp"

namespace fs = std::filesystem;
using namespace garboost;

namespace {

// One backend pair resolved from the config; the toy backend needs the corpus
// for its idf table and candidate pools.
struct Backends {
  std::unique_ptr<ToyBackend> toy;
  std::optional<HttpBackend> http;
  Retriever* retriever = nullptr;
  Generator* generator = nullptr;
};

Backends open_backends(const RunConfig& cfg, const Corpus& corpus) {
  Backends b;
  if (cfg.backend.kind == BackendKind::kToy) {
    b.toy = std::make_unique<ToyBackend>(make_toy_backend_config(cfg), corpus);
    b.retriever = &b.toy->retriever();
    b.generator = &b.toy->generator();
  } else {
    b.http = make_http_backend(make_http_config(cfg));
    b.retriever = b.http->retriever.get();
    b.generator = b.http->generator.get();
  }
  return b;
}

void apply_checkpoint(Backends& b, const RunConfig& cfg, const std::string& path) {
  if (!b.toy) {
    throw ConfigError("checkpoints carry toy-model parameters; "
                      "set backend.kind = \"toy\" to use them");
  }
  auto ckpt = load_boost_checkpoint(path, cfg);
  b.toy->embedder().set_weights(std::move(ckpt.weights));
  b.toy->policy().set_theta(std::move(ckpt.theta));
  b.toy->policy().set_theta_ref(std::move(ckpt.theta_ref));
}

int cmd_ingest(const std::string& corpus_path, const std::string& queries_path,
               const std::string& qrels_path, const std::string& out_dir) {
  DatasetBundle bundle;
  bundle.corpus = load_corpus(corpus_path);
  std::cout << "corpus: " << bundle.corpus.size() << " documents\n";
  if (!queries_path.empty()) {
    bundle.queries = load_queries(queries_path);
    std::cout << "queries: " << bundle.queries.size() << "\n";
  }
  if (!qrels_path.empty()) {
    bundle.qrels = load_qrels(qrels_path);
    size_t rows = 0;
    for (const auto& [q, per] : bundle.qrels.judgments) rows += per.size();
    std::cout << "qrels: " << rows << " judgments over "
              << bundle.qrels.judgments.size() << " queries\n";
  }
  validate_bundle(bundle);
  std::cout << "validation: ok\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    save_corpus(bundle.corpus, (fs::path(out_dir) / "corpus.jsonl").string());
    if (!bundle.queries.empty()) {
      save_queries(bundle.queries, (fs::path(out_dir) / "queries.jsonl").string());
    }
    if (!bundle.qrels.empty()) {
      save_qrels(bundle.qrels, (fs::path(out_dir) / "qrels.tsv").string());
    }
    std::cout << "normalized copies written to " << out_dir << "\n";
  }
  return 0;
}

int cmd_index(const RunConfig& cfg, const std::string& corpus_path,
              const std::string& out_path) {
  auto corpus = load_corpus(corpus_path);
  auto backends = open_backends(cfg, corpus);
  auto index = DenseIndex::build(corpus, *backends.retriever);
  index.save(out_path);
  std::cout << "indexed " << index.size() << " documents (dim " << index.dim()
            << ") -> " << out_path << "\n";
  if (!index.zero_rows().empty()) {
    std::cout << "warning: " << index.zero_rows().size()
              << " documents embedded to zero rows\n";
  }
  return 0;
}

int cmd_qgen(const RunConfig& cfg, const std::string& corpus_path,
             const std::string& out_dir) {
  auto corpus = load_corpus(corpus_path);
  auto backends = open_backends(cfg, corpus);
  auto synth =
      synthesize_training_set(corpus, *backends.generator, cfg.qgen.sample_size,
                              cfg.qgen.task, derive_seed(cfg.boost.seed, "qgen"));
  fs::create_directories(out_dir);
  save_queries(synth.queries, (fs::path(out_dir) / "queries.jsonl").string());
  save_qrels(synth.qrels, (fs::path(out_dir) / "qrels.tsv").string());
  std::cout << "synthesized " << synth.queries.size() << " queries ("
            << synth.rejected << " rejected by quality control) -> " << out_dir
            << "\n";
  return 0;
}

int cmd_boost(const RunConfig& cfg, const std::string& corpus_path,
              const std::string& train_queries_path,
              const std::string& train_qrels_path,
              const std::string& heldout_queries_path,
              const std::string& heldout_qrels_path, const std::string& run_dir,
              const std::string& resume_ckpt) {
  auto corpus = load_corpus(corpus_path);
  BoostInputs inputs;
  inputs.train_queries = load_queries(train_queries_path);
  if (!train_qrels_path.empty()) inputs.train_qrels = load_qrels(train_qrels_path);

  if (!heldout_queries_path.empty()) {
    inputs.heldout_queries = load_queries(heldout_queries_path);
    if (!heldout_qrels_path.empty()) {
      inputs.heldout_qrels = load_qrels(heldout_qrels_path);
    }
  } else if (cfg.boost.heldout_fraction > 0.0) {
    // Reserve a seeded fraction of the training queries for evaluation.
    Rng rng(derive_seed(cfg.boost.seed, "heldout-split"));
    auto queries = inputs.train_queries;
    rng.shuffle(queries);
    const size_t heldout =
        static_cast<size_t>(queries.size() * cfg.boost.heldout_fraction);
    inputs.heldout_queries.assign(queries.begin(), queries.begin() + heldout);
    inputs.train_queries.assign(queries.begin() + heldout, queries.end());
    auto split_qrels = [&](const std::vector<Query>& qs) {
      QrelSet out;
      for (const auto& q : qs) {
        if (const auto* j = inputs.train_qrels.for_query(q.id)) {
          out.judgments[q.id] = *j;
        }
      }
      return out;
    };
    inputs.heldout_qrels = split_qrels(inputs.heldout_queries);
    QrelSet train_only = split_qrels(inputs.train_queries);
    inputs.train_qrels = std::move(train_only);
  }

  // Synthetic queries judge their provenance doc relevant even without qrels.
  for (const auto& q : inputs.heldout_queries) {
    if (q.provenance_doc && !inputs.heldout_qrels.for_query(q.id)) {
      inputs.heldout_qrels.judgments[q.id][*q.provenance_doc] = 1;
    }
  }

  SelfBoost boost(cfg, corpus, std::move(inputs), run_dir);
  std::vector<StageReport> reports;
  if (!resume_ckpt.empty()) {
    boost.load_checkpoint(resume_ckpt);
    reports = boost.run(boost.completed_iterations());
  } else {
    reports = boost.run();
  }

  std::vector<std::pair<std::string, double>> rows;
  for (const auto& r : reports) rows.emplace_back(r.label, r.ndcg10);
  std::cout << stage_table(rows);
  std::cout << "run artifacts in " << run_dir << "\n";
  return 0;
}

int cmd_retrieve(const RunConfig& cfg, const std::string& corpus_path,
                 const std::string& index_path, const std::string& query,
                 const std::string& mode, size_t k,
                 const std::string& checkpoint) {
  auto corpus = load_corpus(corpus_path);
  auto backends = open_backends(cfg, corpus);
  if (!checkpoint.empty()) apply_checkpoint(backends, cfg, checkpoint);
  auto index = DenseIndex::load(index_path);
  if (index.fingerprint() != backends.retriever->fingerprint()) {
    throw FingerprintMismatch(
        "index was built with different retriever parameters");
  }

  std::vector<SearchHit> hits;
  if (mode == "base") {
    auto v = backends.retriever->embed_one(query);
    hits = index.search(v.vector, k);
  } else {
    GarRetrieveConfig gar_cfg = make_gar_config(cfg, cfg.qgen.task,
                                                derive_seed(cfg.boost.seed,
                                                            "retrieve"));
    gar_cfg.k = k;
    hits = gar_retrieve("cli", query, index, *backends.retriever,
                        *backends.generator, gar_cfg)
               .hits;
  }
  for (size_t i = 0; i < hits.size(); ++i) {
    std::cout << (i + 1) << "\t" << hits[i].doc_id << "\t" << hits[i].score
              << "\n";
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& corpus_path,
             const std::string& index_path, const std::string& queries_path,
             const std::string& qrels_path, const std::string& mode,
             const std::string& checkpoint, const std::string& rankings_out) {
  auto corpus = load_corpus(corpus_path);
  auto backends = open_backends(cfg, corpus);
  if (mode == "reinforced-checkpoint") {
    if (checkpoint.empty()) {
      throw ConfigError("eval --mode reinforced-checkpoint requires --checkpoint");
    }
    apply_checkpoint(backends, cfg, checkpoint);
  } else if (!checkpoint.empty()) {
    apply_checkpoint(backends, cfg, checkpoint);
  }
  auto index = DenseIndex::load(index_path);
  auto queries = load_queries(queries_path);
  auto qrels = load_qrels(qrels_path);

  EvalOptions opts;
  opts.k = cfg.eval.k;
  opts.gain = cfg.eval.gain;
  opts.exclude_queries_without_relevant = cfg.eval.exclude_queries_without_relevant;
  const EvalMode eval_mode = mode == "base" ? EvalMode::kBase : EvalMode::kGar;
  auto out = evaluate_mode(eval_mode, queries, qrels, index, *backends.retriever,
                           backends.generator,
                           make_gar_config(cfg, cfg.qgen.task, 0), opts,
                           cfg.boost.seed);
  std::cout << "nDCG@" << opts.k << ": " << out.ndcg.macro_average * 100.0
            << " (" << out.ndcg.evaluated << " queries, " << out.ndcg.excluded
            << " excluded)\n";
  std::cout << "recall@" << opts.k << ": " << out.recall.macro_average * 100.0
            << "\n";
  if (!rankings_out.empty()) {
    save_rankings(out.rankings, rankings_out);
    std::cout << "per-query rankings -> " << rankings_out << "\n";
  }
  return 0;
}

int cmd_export_dpo(const RunConfig& cfg, const std::string& corpus_path,
                   const std::string& queries_path, const std::string& qrels_path,
                   const std::string& out_path, const std::string& checkpoint,
                   double gamma) {
  auto corpus = load_corpus(corpus_path);
  auto backends = open_backends(cfg, corpus);
  if (!checkpoint.empty()) apply_checkpoint(backends, cfg, checkpoint);
  auto queries = load_queries(queries_path);
  QrelSet qrels;
  if (!qrels_path.empty()) qrels = load_qrels(qrels_path);

  std::vector<PreferencePair> pairs;
  size_t skipped = 0;
  for (const auto& query : queries) {
    std::string dstar_text;
    if (query.provenance_doc) {
      if (const Document* d = corpus.find(*query.provenance_doc)) {
        dstar_text = d->embedding_text();
      }
    } else if (const auto* j = qrels.for_query(query.id)) {
      int best = 0;
      for (const auto& [doc_id, grade] : *j) {
        if (grade > best) {
          if (const Document* d = corpus.find(doc_id)) {
            dstar_text = d->embedding_text();
            best = grade;
          }
        }
      }
    }
    if (dstar_text.empty()) {
      ++skipped;
      continue;
    }
    auto batch = backends.generator->generate_hypothetical(
        query.text, cfg.qgen.task, cfg.rlrf.sample_size,
        derive_seed(cfg.boost.seed, "export-dpo", fnv1a64(query.id)));
    if (batch.texts.size() < 2) {
      ++skipped;
      continue;
    }
    auto scores = score_hypotheticals(query.text, batch.texts, dstar_text,
                                      *backends.retriever, cfg.rlrf.alpha);
    if (scores.candidates.size() < 2) {
      ++skipped;
      continue;
    }
    auto [winner, loser] = select_extremes(scores);
    auto decision = apply_filter(winner.score, loser.score, scores.query_score,
                                 gamma);
    if (!decision.accepted) continue;
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
  }
  const size_t written = export_pairs(pairs, cfg.qgen.task, out_path);
  std::cout << "exported " << written << " preference pairs -> " << out_path
            << " (" << skipped << " queries skipped)\n";
  return 0;
}

int cmd_make_bundle(const std::string& out_dir, const SynthBundleConfig& cfg) {
  auto bundle = make_synth_bundle(cfg);
  save_synth_bundle(bundle, out_dir);
  std::cout << "bundle: " << bundle.corpus.size() << " docs, "
            << bundle.train_queries.size() << " training queries, "
            << bundle.heldout_queries.size() << " held-out queries -> "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"garboost: self-boosting generation-augmented retrieval"};
  app.require_subcommand(1);

  std::string config_path;
  std::string corpus_path;
  std::string queries_path;
  std::string qrels_path;
  std::string heldout_queries_path;
  std::string heldout_qrels_path;
  std::string out_path;
  std::string run_dir = "run";
  std::string index_path;
  std::string query_text;
  std::string mode = "base";
  std::string checkpoint;
  std::string resume_ckpt;
  size_t k = 10;
  double gamma = 1.05;
  SynthBundleConfig bundle_cfg;

  auto* ingest = app.add_subcommand("ingest", "validate and convert a corpus");
  ingest->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  ingest->add_option("--queries", queries_path, "queries JSONL");
  ingest->add_option("--qrels", qrels_path, "qrels TSV");
  ingest->add_option("--out", out_path, "write normalized copies here");

  auto* index_cmd = app.add_subcommand("index", "build the dense index");
  index_cmd->add_option("--config", config_path, "config JSON")->required();
  index_cmd->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  index_cmd->add_option("--out", out_path, "index output file")->required();

  auto* qgen = app.add_subcommand("qgen", "synthesize training queries");
  qgen->add_option("--config", config_path)->required();
  qgen->add_option("--corpus", corpus_path)->required();
  qgen->add_option("--out", out_path, "output directory")->required();

  auto* boost = app.add_subcommand("boost", "run the self-boosting schedule");
  boost->add_option("--config", config_path)->required();
  boost->add_option("--corpus", corpus_path)->required();
  boost->add_option("--train-queries", queries_path)->required();
  boost->add_option("--train-qrels", qrels_path);
  boost->add_option("--heldout-queries", heldout_queries_path);
  boost->add_option("--heldout-qrels", heldout_qrels_path);
  boost->add_option("--run-dir", run_dir);
  boost->add_option("--resume", resume_ckpt, "checkpoint to resume from");

  auto* retrieve = app.add_subcommand("retrieve", "answer a single query");
  retrieve->add_option("--config", config_path)->required();
  retrieve->add_option("--corpus", corpus_path)->required();
  retrieve->add_option("--index", index_path)->required();
  retrieve->add_option("--query", query_text)->required();
  retrieve->add_option("--mode", mode)->check(CLI::IsMember({"base", "gar"}));
  retrieve->add_option("--k", k);
  retrieve->add_option("--checkpoint", checkpoint);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate retrieval quality");
  eval_cmd->add_option("--config", config_path)->required();
  eval_cmd->add_option("--corpus", corpus_path)->required();
  eval_cmd->add_option("--index", index_path)->required();
  eval_cmd->add_option("--queries", queries_path)->required();
  eval_cmd->add_option("--qrels", qrels_path)->required();
  eval_cmd->add_option("--mode", mode)
      ->check(CLI::IsMember({"base", "gar", "reinforced-checkpoint"}));
  eval_cmd->add_option("--checkpoint", checkpoint);
  eval_cmd->add_option("--rankings-out", out_path);

  auto* export_dpo = app.add_subcommand("export-dpo",
                                        "export preference pairs for external "
                                        "trainers");
  export_dpo->add_option("--config", config_path)->required();
  export_dpo->add_option("--corpus", corpus_path)->required();
  export_dpo->add_option("--queries", queries_path)->required();
  export_dpo->add_option("--qrels", qrels_path);
  export_dpo->add_option("--out", out_path)->required();
  export_dpo->add_option("--checkpoint", checkpoint);
  export_dpo->add_option("--gamma", gamma)->check(CLI::Range(1.0, 10.0));

  auto* make_bundle = app.add_subcommand("make-bundle",
                                         "generate the synthetic benchmark "
                                         "bundle");
  make_bundle->add_option("--out", out_path)->required();
  make_bundle->add_option("--seed", bundle_cfg.seed);
  make_bundle->add_option("--topics", bundle_cfg.topics);
  make_bundle->add_option("--docs-per-topic", bundle_cfg.docs_per_topic);
  make_bundle->add_option("--train", bundle_cfg.train_queries);
  make_bundle->add_option("--heldout", bundle_cfg.heldout_queries);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // exits 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*ingest) {
      return cmd_ingest(corpus_path, queries_path, qrels_path, out_path);
    }
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (*index_cmd) return cmd_index(cfg, corpus_path, out_path);
    if (*qgen) return cmd_qgen(cfg, corpus_path, out_path);
    if (*boost) {
      return cmd_boost(cfg, corpus_path, queries_path, qrels_path,
                       heldout_queries_path, heldout_qrels_path, run_dir,
                       resume_ckpt);
    }
    if (*retrieve) {
      return cmd_retrieve(cfg, corpus_path, index_path, query_text, mode, k,
                          checkpoint);
    }
    if (*eval_cmd) {
      return cmd_eval(cfg, corpus_path, index_path, queries_path, qrels_path,
                      mode, checkpoint, out_path);
    }
    if (*export_dpo) {
      return cmd_export_dpo(cfg, corpus_path, queries_path, qrels_path, out_path,
                            checkpoint, gamma);
    }
    if (*make_bundle) return cmd_make_bundle(out_path, bundle_cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
