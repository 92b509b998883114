#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace garboost {

// Lowercases and splits on every non-alphanumeric byte.
std::vector<std::string> tokenize(std::string_view text);

// Splits on '.', '!' and '?'. Sentences are returned trimmed and non-empty.
std::vector<std::string> split_sentences(std::string_view text);

// Fixed 50-word English stopword list shipped with the library.
const std::vector<std::string>& stopwords();
bool is_stopword(const std::string& token);

// Smoothed inverse document frequency over a corpus:
//   idf(t) = ln((1 + N) / (1 + df(t))) + 1
// which is strictly positive for every token. Unknown tokens get df = 0.
class IdfTable {
 public:
  IdfTable() = default;

  // One call per document; tokens are deduplicated per document.
  void add_document(std::string_view text);
  void finalize();

  double idf(const std::string& token) const;
  size_t document_count() const { return num_docs_; }

 private:
  std::map<std::string, size_t> df_;
  size_t num_docs_ = 0;
  bool finalized_ = false;
};

}  // namespace garboost
