#include "garboost/rlrf.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"
#include "garboost/gar.hpp"

namespace garboost {

using nlohmann::json;

HypotheticalScores score_hypotheticals(const std::string& query_text,
                                       const std::vector<std::string>& candidates,
                                       const std::string& dstar_text,
                                       Retriever& retriever, double alpha) {
  if (candidates.empty()) throw Error("score_hypotheticals: no candidates");

  auto q = retriever.embed_one(query_text);
  auto dstar = retriever.embed_one(dstar_text);
  if (dstar.is_zero) {
    throw Error("score_hypotheticals: d* embedded to the zero vector");
  }

  HypotheticalScores out;
  out.query_score = dot(q.vector, dstar.vector);

  auto embedded = retriever.embed_batch(candidates);
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (embedded.zero_flags[i]) {
      ++out.dropped_zero;
      continue;
    }
    const Vec combined = simplified_combine(q.vector, embedded.rows[i], alpha);
    out.candidates.push_back(
        {i, candidates[i], preference_score(combined, dstar.vector)});
  }
  return out;
}

std::pair<CandidateScore, CandidateScore> select_extremes(
    const HypotheticalScores& scores) {
  if (scores.candidates.size() < 2) {
    throw NotEnoughCandidates("select_extremes: need at least 2 candidates, have " +
                              std::to_string(scores.candidates.size()));
  }
  size_t best = 0;
  size_t worst = 0;
  for (size_t i = 1; i < scores.candidates.size(); ++i) {
    if (scores.candidates[i].score > scores.candidates[best].score) best = i;
    if (scores.candidates[i].score < scores.candidates[worst].score) worst = i;
  }
  // All-equal scores: keep distinct entries so the filter can reject the pair.
  if (best == worst) worst = best == 0 ? 1 : 0;
  return {scores.candidates[best], scores.candidates[worst]};
}

FilterDecision apply_filter(double score_win, double score_lose,
                            double score_query, double gamma) {
  if (!(gamma > 1.0)) throw Error("apply_filter: gamma must exceed 1");
  FilterDecision d;
  d.rule1_ok = score_win > score_query;
  d.rule2_ok = score_win > gamma * score_lose;
  d.accepted = d.rule1_ok && d.rule2_ok;
  if (!d.rule1_ok) {
    d.reason = "rule-1";
  } else if (!d.rule2_ok) {
    d.reason = "rule-2";
  }
  return d;
}

namespace {

double softplus(double x) {
  // log(1 + e^x) without overflow.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double dpo_loss(double lp_w, double lp_w_ref, double lp_l, double lp_l_ref,
                double beta) {
  if (!(beta > 0.0)) throw Error("dpo_loss: beta must be positive");
  for (double v : {lp_w, lp_w_ref, lp_l, lp_l_ref}) {
    if (!std::isfinite(v)) throw Error("dpo_loss: non-finite log-probability");
  }
  const double margin = beta * ((lp_w - lp_w_ref) - (lp_l - lp_l_ref));
  return softplus(-margin);  // == -log sigmoid(margin)
}

double sft_loss(double lp_w) {
  if (!std::isfinite(lp_w)) throw Error("sft_loss: non-finite log-probability");
  return -lp_w;
}

namespace {

struct PairInPool {
  const CandidatePool* pool;
  size_t win_index;
  size_t lose_index;
};

PairInPool locate(const PreferencePair& pair, const PoolMap& pools) {
  auto it = pools.find(pair.query_id);
  if (it == pools.end() || it->second == nullptr) {
    throw CandidateNotInPool("train_policy: no pool for query " + pair.query_id);
  }
  const CandidatePool& pool = *it->second;
  const int wi = pool.find(pair.winning_text);
  const int li = pool.find(pair.losing_text);
  if (wi < 0 || li < 0) {
    throw CandidateNotInPool("train_policy: pair member missing from pool for query " +
                             pair.query_id);
  }
  return {&pool, static_cast<size_t>(wi), static_cast<size_t>(li)};
}

}  // namespace

TrainPolicyResult train_policy(ToyPolicy& policy,
                               const std::vector<PreferencePair>& pairs,
                               const PoolMap& pools, const DpoConfig& cfg) {
  if (pairs.empty()) throw Error("train_policy: no pairs");
  if (!(cfg.learning_rate > 0.0)) throw Error("train_policy: lr must be positive");

  std::vector<PairInPool> located;
  located.reserve(pairs.size());
  for (const auto& p : pairs) located.push_back(locate(p, pools));

  const double inv_n = 1.0 / static_cast<double>(pairs.size());

  auto batch_loss_and_grad = [&](Vec* grad_out) {
    double total = 0.0;
    for (const auto& loc : located) {
      const Vec lp = policy.logprobs(*loc.pool);
      const double lp_w = lp[loc.win_index];
      if (cfg.objective == PolicyObjective::kSft) {
        total += sft_loss(lp_w) * inv_n;
        if (grad_out) {
          axpy(-inv_n, policy.logprob_grad(*loc.pool, loc.win_index), *grad_out);
        }
        continue;
      }
      const double lp_l = lp[loc.lose_index];
      const Vec lp_ref = policy.logprobs_ref(*loc.pool);
      const double margin = cfg.beta * ((lp_w - lp_ref[loc.win_index]) -
                                        (lp_l - lp_ref[loc.lose_index]));
      total += softplus(-margin) * inv_n;
      if (grad_out) {
        // d/d margin of softplus(-margin) is -sigmoid(-margin)
        const double coeff = -1.0 / (1.0 + std::exp(margin)) * cfg.beta * inv_n;
        axpy(coeff, policy.logprob_grad(*loc.pool, loc.win_index), *grad_out);
        axpy(-coeff, policy.logprob_grad(*loc.pool, loc.lose_index), *grad_out);
      }
    }
    return total;
  };

  TrainPolicyResult result;
  result.loss_trace.reserve(cfg.steps + 1);
  result.loss_trace.push_back(batch_loss_and_grad(nullptr));
  for (size_t step = 0; step < cfg.steps; ++step) {
    Vec grad(policy.psi_dim(), 0.0);
    batch_loss_and_grad(&grad);
    axpy(-cfg.learning_rate, grad, policy.mutable_theta());
    result.loss_trace.push_back(batch_loss_and_grad(nullptr));
  }
  return result;
}

size_t export_pairs(const std::vector<PreferencePair>& pairs,
                    const std::string& task, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write pair export: " + path);
  for (const auto& p : pairs) {
    json rec{{"prompt", hypothetical_doc_prompt(task, p.query_text)},
             {"chosen", p.winning_text},
             {"rejected", p.losing_text},
             {"meta",
              {{"s_w", p.score_win},
               {"s_l", p.score_lose},
               {"s_q", p.score_query},
               {"gamma", p.gamma},
               {"query_id", p.query_id},
               {"query", p.query_text}}}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("short write: " + path);
  return pairs.size();
}

std::vector<PreferencePair> import_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read pair export: " + path);
  std::vector<PreferencePair> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRecord(path, line_no, e.what());
    }
    PreferencePair p;
    p.winning_text = rec.at("chosen").get<std::string>();
    p.losing_text = rec.at("rejected").get<std::string>();
    const auto& meta = rec.at("meta");
    p.score_win = meta.at("s_w").get<double>();
    p.score_lose = meta.at("s_l").get<double>();
    p.score_query = meta.at("s_q").get<double>();
    p.gamma = meta.at("gamma").get<double>();
    p.query_id = meta.at("query_id").get<std::string>();
    p.query_text = meta.at("query").get<std::string>();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace garboost
