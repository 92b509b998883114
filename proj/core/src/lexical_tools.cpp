#include "garboost/lexical_tools.hpp"

#include <algorithm>
#include <set>

#include "garboost/error.hpp"

namespace garboost {

namespace {

std::set<std::string> unique_tokens(const std::string& text) {
  std::set<std::string> out;
  for (auto& t : tokenize(text)) out.insert(std::move(t));
  return out;
}

}  // namespace

std::vector<std::string> lexical_rank_oracle(const std::string& query,
                                             const std::vector<ScoredDoc>& docs,
                                             const IdfTable& idf) {
  const auto q_tokens = unique_tokens(query);
  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(docs.size());
  for (const auto& d : docs) {
    double score = 0.0;
    for (const auto& t : unique_tokens(d.text)) {
      if (q_tokens.count(t)) {
        const double w = idf.idf(t);
        score += w * w;
      }
    }
    scored.emplace_back(score, d.id);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (auto& [s, id] : scored) out.push_back(std::move(id));
  return out;
}

std::string extract_query(const std::string& doc_text, const IdfTable& idf,
                          uint64_t seed) {
  (void)seed;
  auto sentences = split_sentences(doc_text);
  std::vector<std::pair<double, size_t>> ranked;
  for (size_t i = 0; i < sentences.size(); ++i) {
    double sum = 0.0;
    for (const auto& t : tokenize(sentences[i])) sum += idf.idf(t);
    ranked.emplace_back(sum, i);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (const auto& [sum, i] : ranked) {
    std::vector<std::string> kept;
    for (auto& t : tokenize(sentences[i])) {
      if (!is_stopword(t)) kept.push_back(std::move(t));
      if (kept.size() == 10) break;
    }
    if (kept.empty()) continue;
    std::string out = kept[0];
    for (size_t k = 1; k < kept.size(); ++k) out += " " + kept[k];
    return out;
  }
  throw NoExtractableQuery("no non-stopword tokens in document text");
}

bool overlap_judge(const std::string& query, const std::string& doc_text,
                   const IdfTable& idf, double threshold) {
  const auto q_tokens = unique_tokens(query);
  if (q_tokens.empty()) return false;
  const auto d_tokens = unique_tokens(doc_text);
  double total = 0.0;
  double shared = 0.0;
  for (const auto& t : q_tokens) {
    const double w = idf.idf(t);
    total += w;
    if (d_tokens.count(t)) shared += w;
  }
  return shared / total >= threshold;
}

}  // namespace garboost
