#include "garboost/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

namespace garboost {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    size_t b = cur.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
      cur.clear();
      return;
    }
    size_t e = cur.find_last_not_of(" \t\r\n");
    out.push_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> kWords = {
      "a",    "an",   "and",  "are",   "as",    "at",    "be",   "but",
      "by",   "can",  "do",   "for",   "from",  "had",   "has",  "have",
      "he",   "her",  "his",  "if",    "in",    "is",    "it",   "its",
      "may",  "more", "not",  "of",    "on",    "or",    "she",  "so",
      "that", "the",  "their", "there", "these", "they",  "this", "to",
      "was",  "we",   "were", "what",  "when",  "which", "will", "with",
      "would", "you"};
  return kWords;
}

bool is_stopword(const std::string& token) {
  static const std::unordered_set<std::string> kSet(stopwords().begin(),
                                                    stopwords().end());
  return kSet.count(token) > 0;
}

void IdfTable::add_document(std::string_view text) {
  std::set<std::string> uniq;
  for (auto& t : tokenize(text)) uniq.insert(std::move(t));
  for (const auto& t : uniq) df_[t] += 1;
  ++num_docs_;
}

void IdfTable::finalize() { finalized_ = true; }

double IdfTable::idf(const std::string& token) const {
  size_t df = 0;
  if (auto it = df_.find(token); it != df_.end()) df = it->second;
  return std::log((1.0 + static_cast<double>(num_docs_)) /
                  (1.0 + static_cast<double>(df))) +
         1.0;
}

}  // namespace garboost
