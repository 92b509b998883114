#include "garboost/rlgf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "garboost/error.hpp"

namespace garboost {

double proximity_score(const Vec& query_vector, const Vec& doc_vector,
                       const std::vector<Vec>& hyp_vectors, double alpha0,
                       double alphai) {
  double rho = alpha0 * dot(query_vector, doc_vector);
  for (const auto& h : hyp_vectors) rho += alphai * dot(query_vector, h);
  return rho;
}

double basic_objective_score(const Vec& query_vector, const Vec& doc_vector,
                             const std::vector<Vec>& hyp_vectors, double alpha0,
                             double alphai) {
  double s = alpha0 * dot(query_vector, doc_vector);
  for (const auto& h : hyp_vectors) s += alphai * dot(h, doc_vector);
  return s;
}

namespace {

// log(sum_i exp(s_i)) with the max factored out.
double log_sum_exp(const Vec& scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - m);
  return m + std::log(z);
}

}  // namespace

double contrastive_loss(const Vec& query_vector, const std::vector<Vec>& positives,
                        const std::vector<Vec>& negatives, double tau) {
  if (positives.empty()) throw Error("contrastive_loss: no positive documents");
  if (!(tau > 0.0)) throw Error("contrastive_loss: tau must be positive");
  double loss = 0.0;
  for (const auto& pos : positives) {
    Vec scores;
    scores.reserve(1 + negatives.size());
    scores.push_back(dot(query_vector, pos) / tau);
    for (const auto& neg : negatives) {
      scores.push_back(dot(query_vector, neg) / tau);
    }
    loss += log_sum_exp(scores) - scores[0];
  }
  return loss;
}

double distillation_loss(const Vec& query_vector, const std::vector<Vec>& ranked,
                         double tau) {
  if (!(tau > 0.0)) throw Error("distillation_loss: tau must be positive");
  if (ranked.empty()) return 0.0;
  Vec scores(ranked.size());
  for (size_t i = 0; i < ranked.size(); ++i) {
    scores[i] = dot(query_vector, ranked[i]) / tau;
  }
  double loss = 0.0;
  for (size_t k = 0; k < scores.size(); ++k) {
    Vec suffix(scores.begin() + k, scores.end());
    loss += log_sum_exp(suffix) - scores[k];
  }
  return loss / static_cast<double>(ranked.size());
}

std::string build_ranking_prompt(const std::string& query,
                                 const std::vector<std::string>& doc_texts) {
  std::string prompt = "Query: " + query + ". ";
  for (size_t i = 0; i < doc_texts.size(); ++i) {
    if (i > 0) prompt += ", ";
    prompt += "Doc [" + std::to_string(i + 1) + "]: " + doc_texts[i];
  }
  prompt += " Rank these documents based on their relevance to the query.";
  return prompt;
}

RankedList collect_ranking_feedback(Generator& generator,
                                    const std::string& query_id,
                                    const std::string& query_text,
                                    const DenseIndex& index, Retriever& retriever,
                                    const Document& dstar, const Corpus& corpus,
                                    size_t n) {
  if (n < 1) throw Error("collect_ranking_feedback: N must be >= 1");

  auto q = retriever.embed_one(query_text);
  std::vector<ScoredDoc> candidates;
  std::set<std::string> seen;
  if (n > 1) {
    for (const auto& hit : index.search(q.vector, n - 1)) {
      const Document* doc = corpus.find(hit.doc_id);
      if (!doc) continue;
      if (seen.insert(doc->id).second) {
        candidates.push_back({doc->id, doc->embedding_text()});
      }
    }
  }
  if (seen.insert(dstar.id).second) {
    candidates.push_back({dstar.id, dstar.embedding_text()});
  }

  RankedList out;
  out.query_id = query_id;
  try {
    out.doc_ids = generator.rank_docs(query_text, candidates);
    out.source = RankSource::kGenerator;
  } catch (const RankParseError&) {
    out.doc_ids.clear();
    for (const auto& c : candidates) out.doc_ids.push_back(c.id);
    out.source = RankSource::kFallbackRetriever;
  }
  return out;
}

// --- training ----------------------------------------------------------------

namespace {

// One embedded text inside the differentiable batch graph.
struct Node {
  SparseVector features;
  Vec y;       // W^T phi
  Vec e;       // normalized output actually scored
  double norm = 0.0;
  bool zero = false;
  Vec grad_e;  // dLoss/de, accumulated
};

class BatchGraph {
 public:
  explicit BatchGraph(const ToyEmbedder& embedder) : embedder_(embedder) {}

  size_t node_for(const std::string& text) {
    auto it = by_text_.find(text);
    if (it != by_text_.end()) return it->second;
    Node node;
    node.features = embedder_.hasher().featurize(text);
    const size_t id = nodes_.size();
    nodes_.push_back(std::move(node));
    by_text_.emplace(text, id);
    return id;
  }

  void forward() {
    const bool normalize = embedder_.normalize();
    for (auto& node : nodes_) {
      node.y = embedder_.project(node.features);
      node.norm = l2_norm(node.y);
      node.zero = node.norm == 0.0;
      node.e = node.y;
      if (normalize && !node.zero) {
        const double inv = 1.0 / node.norm;
        for (double& v : node.e) v *= inv;
      }
      node.grad_e.assign(node.e.size(), 0.0);
    }
  }

  const Node& node(size_t id) const { return nodes_[id]; }
  Vec& grad(size_t id) { return nodes_[id].grad_e; }

  // Backprop through normalization and the linear projection into grad_w.
  void backward(Vec& grad_w) const {
    const bool normalize = embedder_.normalize();
    const size_t d = embedder_.dim();
    for (const auto& node : nodes_) {
      if (node.zero) continue;
      Vec g = node.grad_e;
      if (normalize) {
        // e = y / |y|  =>  dL/dy = (g - (g.e) e) / |y|
        const double ge = dot(g, node.e);
        for (size_t j = 0; j < d; ++j) {
          g[j] = (g[j] - ge * node.e[j]) / node.norm;
        }
      }
      for (const auto& [bucket, value] : node.features.entries) {
        double* row = grad_w.data() + static_cast<size_t>(bucket) * d;
        for (size_t j = 0; j < d; ++j) row[j] += value * g[j];
      }
    }
  }

  std::vector<uint32_t> touched_rows() const {
    std::set<uint32_t> rows;
    for (const auto& node : nodes_) {
      for (const auto& [bucket, value] : node.features.entries) {
        (void)value;
        rows.insert(bucket);
      }
    }
    return {rows.begin(), rows.end()};
  }

 private:
  const ToyEmbedder& embedder_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, size_t> by_text_;
};

// Anchor/positive pairs and the per-example negative node lists, resolved once
// so that loss evaluation is a pure function of the current weights.
struct ResolvedExample {
  size_t query_node = 0;
  std::vector<std::pair<size_t, size_t>> positive_pairs;  // (anchor, positive)
  std::vector<size_t> negative_nodes;
  std::vector<size_t> ranked_nodes;
};

struct ResolvedBatch {
  BatchGraph graph;
  std::vector<ResolvedExample> examples;
  size_t skipped = 0;
};

ResolvedBatch resolve_batch(const ToyEmbedder& embedder,
                            const std::vector<TrainExample>& examples,
                            const RlgfConfig& cfg, RlgfLossKind kind) {
  ResolvedBatch batch{BatchGraph(embedder), {}, 0};

  for (size_t i = 0; i < examples.size(); ++i) {
    const TrainExample& ex = examples[i];
    ResolvedExample re;
    re.query_node = batch.graph.node_for(ex.query_text);

    std::set<std::string> positive_texts;
    positive_texts.insert(ex.dstar.text);
    const size_t dstar_node = batch.graph.node_for(ex.dstar.text);
    re.positive_pairs.emplace_back(re.query_node, dstar_node);
    for (const auto& h : ex.hyp_texts) {
      if (!positive_texts.insert(h).second) continue;
      const size_t h_node = batch.graph.node_for(h);
      if (cfg.proximity) {
        re.positive_pairs.emplace_back(re.query_node, h_node);
      } else {
        re.positive_pairs.emplace_back(h_node, dstar_node);
      }
    }

    std::set<std::string> negative_texts;
    for (const auto& neg : ex.negatives) {
      if (positive_texts.count(neg.text)) continue;
      if (!negative_texts.insert(neg.text).second) continue;
      re.negative_nodes.push_back(batch.graph.node_for(neg.text));
    }
    // In-batch negatives: gold docs of the other examples.
    for (size_t j = 0; j < examples.size(); ++j) {
      if (j == i) continue;
      const auto& other = examples[j].dstar.text;
      if (positive_texts.count(other)) continue;
      if (!negative_texts.insert(other).second) continue;
      re.negative_nodes.push_back(batch.graph.node_for(other));
    }

    if (kind != RlgfLossKind::kContrastive && cfg.distillation) {
      for (const auto& rdoc : ex.ranked) {
        re.ranked_nodes.push_back(batch.graph.node_for(rdoc.text));
      }
    }
    batch.examples.push_back(std::move(re));
  }
  return batch;
}

// Softmax cross-entropy over (target + pool) score lists; accumulates
// dLoss/de into the graph when requested. Scores are e_a . e_c / tau.
double softmax_pair_loss(BatchGraph& graph, size_t anchor,
                         const std::vector<size_t>& candidates, size_t target_pos,
                         double tau, double weight, bool with_grad) {
  Vec scores(candidates.size());
  for (size_t c = 0; c < candidates.size(); ++c) {
    scores[c] = dot(graph.node(anchor).e, graph.node(candidates[c]).e) / tau;
  }
  const double lse = log_sum_exp(scores);
  const double loss = weight * (lse - scores[target_pos]);
  if (with_grad) {
    const Node& a = graph.node(anchor);
    for (size_t c = 0; c < candidates.size(); ++c) {
      const double p = std::exp(scores[c] - lse);
      const double coef =
          weight * (p - (c == target_pos ? 1.0 : 0.0)) / tau;
      axpy(coef, graph.node(candidates[c]).e, graph.grad(anchor));
      axpy(coef, a.e, graph.grad(candidates[c]));
    }
  }
  return loss;
}

}  // namespace

namespace {

double eval_batch(ResolvedBatch& batch, const RlgfConfig& cfg, RlgfLossKind kind,
                  Vec* grad_w, double* loss_ctr_out, double* loss_dst_out,
                  size_t* skipped_out) {
  batch.graph.forward();
  batch.skipped = 0;
  const bool with_grad = grad_w != nullptr;

  double total_ctr = 0.0;
  double total_dst = 0.0;
  size_t counted = 0;
  for (const auto& re : batch.examples) {
    if (batch.graph.node(re.query_node).zero) {
      ++batch.skipped;
      continue;
    }
    ++counted;
  }
  if (counted == 0) throw Error("rlgf: every example is degenerate");
  const double inv_n = 1.0 / static_cast<double>(counted);
  const double lambda = kind == RlgfLossKind::kCombined ? cfg.lambda_dst : 1.0;

  for (const auto& re : batch.examples) {
    if (batch.graph.node(re.query_node).zero) continue;

    if (kind != RlgfLossKind::kDistillation) {
      for (const auto& [anchor, positive] : re.positive_pairs) {
        if (batch.graph.node(anchor).zero || batch.graph.node(positive).zero) {
          continue;
        }
        std::vector<size_t> candidates;
        candidates.reserve(1 + re.negative_nodes.size());
        candidates.push_back(positive);
        for (size_t n : re.negative_nodes) {
          if (!batch.graph.node(n).zero) candidates.push_back(n);
        }
        total_ctr += softmax_pair_loss(batch.graph, anchor, candidates, 0,
                                       cfg.tau, inv_n, with_grad);
      }
    }

    if (kind != RlgfLossKind::kContrastive && !re.ranked_nodes.empty()) {
      std::vector<size_t> list;
      list.reserve(re.ranked_nodes.size());
      for (size_t n : re.ranked_nodes) {
        if (!batch.graph.node(n).zero) list.push_back(n);
      }
      if (!list.empty()) {
        const double w = inv_n * lambda / static_cast<double>(list.size());
        for (size_t k = 0; k < list.size(); ++k) {
          std::vector<size_t> suffix(list.begin() + k, list.end());
          total_dst += softmax_pair_loss(batch.graph, re.query_node, suffix, 0,
                                         cfg.tau, w, with_grad);
        }
      }
    }
  }

  if (with_grad) batch.graph.backward(*grad_w);
  if (loss_ctr_out) *loss_ctr_out = total_ctr;
  if (loss_dst_out) *loss_dst_out = total_dst;
  if (skipped_out) *skipped_out = batch.skipped;

  switch (kind) {
    case RlgfLossKind::kContrastive:
      return total_ctr;
    case RlgfLossKind::kDistillation:
      return total_dst;
    case RlgfLossKind::kCombined:
      return total_ctr + total_dst;
  }
  return 0.0;
}

}  // namespace

double rlgf_batch_loss(const ToyEmbedder& embedder,
                       const std::vector<TrainExample>& examples,
                       const RlgfConfig& cfg, RlgfLossKind kind, Vec* grad_w,
                       double* loss_ctr_out, double* loss_dst_out,
                       size_t* skipped_out) {
  if (examples.empty()) throw Error("rlgf: no training examples");
  if (!(cfg.tau > 0.0)) throw Error("rlgf: tau must be positive");
  ResolvedBatch batch = resolve_batch(embedder, examples, cfg, kind);
  return eval_batch(batch, cfg, kind, grad_w, loss_ctr_out, loss_dst_out,
                    skipped_out);
}

TrainRetrieverResult train_retriever(ToyEmbedder& embedder,
                                     const std::vector<TrainExample>& examples,
                                     const RlgfConfig& cfg) {
  if (examples.empty()) throw Error("train_retriever: no examples");
  if (!(cfg.learning_rate > 0.0)) throw Error("train_retriever: lr must be positive");
  if (!(cfg.tau > 0.0)) throw Error("train_retriever: tau must be positive");

  TrainRetrieverResult result;
  const RlgfLossKind kind = RlgfLossKind::kCombined;

  // Features are pure functions of the texts, so the batch graph is resolved
  // once and re-forwarded per epoch with the current weights.
  ResolvedBatch batch = resolve_batch(embedder, examples, cfg, kind);

  double ctr = 0.0;
  double dst = 0.0;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Vec grad(embedder.weights().size(), 0.0);
    eval_batch(batch, cfg, kind, &grad, &ctr, &dst, nullptr);
    result.trace.push_back({epoch, ctr, dst, cfg.learning_rate});
    result.skipped_examples = batch.skipped;
    axpy(-cfg.learning_rate, grad, embedder.mutable_weights());
    embedder.invalidate_fingerprint();
  }
  eval_batch(batch, cfg, kind, nullptr, &ctr, &dst, nullptr);
  result.trace.push_back({cfg.epochs, ctr, dst, cfg.learning_rate});
  return result;
}

GradCheckResult check_gradients(ToyEmbedder& embedder,
                                const std::vector<TrainExample>& examples,
                                const RlgfConfig& cfg, RlgfLossKind kind,
                                double h) {
  if (!(h > 0.0)) throw Error("check_gradients: h must be positive");

  Vec analytic(embedder.weights().size(), 0.0);
  rlgf_batch_loss(embedder, examples, cfg, kind, &analytic);

  ResolvedBatch batch = resolve_batch(embedder, examples, cfg, kind);
  const auto rows = batch.graph.touched_rows();
  const size_t d = embedder.dim();

  GradCheckResult res;
  Vec& w = embedder.mutable_weights();
  for (uint32_t row : rows) {
    for (size_t j = 0; j < d; ++j) {
      const size_t idx = static_cast<size_t>(row) * d + j;
      const double saved = w[idx];
      w[idx] = saved + h;
      embedder.invalidate_fingerprint();
      const double up = rlgf_batch_loss(embedder, examples, cfg, kind, nullptr);
      w[idx] = saved - h;
      embedder.invalidate_fingerprint();
      const double down = rlgf_batch_loss(embedder, examples, cfg, kind, nullptr);
      w[idx] = saved;
      embedder.invalidate_fingerprint();
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(analytic[idx]), std::abs(fd), 1e-4});
      res.max_rel_error =
          std::max(res.max_rel_error, std::abs(analytic[idx] - fd) / denom);
      ++res.coords_checked;
    }
  }
  return res;
}

}  // namespace garboost
