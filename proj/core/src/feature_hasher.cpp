#include "garboost/feature_hasher.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

FeatureHasher::FeatureHasher(FeatureHasherConfig cfg) : cfg_(cfg) {
  if (cfg_.ngram_min < 1 || cfg_.ngram_min > cfg_.ngram_max) {
    throw ConfigError("feature hasher: require 1 <= ngram_min <= ngram_max");
  }
  if (cfg_.dim == 0) throw ConfigError("feature hasher: dim must be > 0");
}

SparseVector FeatureHasher::featurize(std::string_view text) const {
  std::string norm;
  norm.reserve(text.size());
  bool prev_space = true;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!prev_space) {
        norm.push_back(' ');
        prev_space = true;
      }
    } else {
      norm.push_back(static_cast<char>(std::tolower(c)));
      prev_space = false;
    }
  }
  while (!norm.empty() && norm.back() == ' ') norm.pop_back();

  std::map<uint32_t, double> counts;
  for (uint32_t n = cfg_.ngram_min; n <= cfg_.ngram_max; ++n) {
    if (norm.size() < n) break;
    for (size_t i = 0; i + n <= norm.size(); ++i) {
      uint64_t h = fnv1a64(std::string_view(norm).substr(i, n), cfg_.hash_seed);
      counts[static_cast<uint32_t>(h % cfg_.dim)] += 1.0;
    }
  }

  SparseVector out;
  out.entries.assign(counts.begin(), counts.end());
  double norm2 = 0.0;
  for (const auto& [b, w] : out.entries) norm2 += w * w;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [b, w] : out.entries) w *= inv;
  }
  return out;
}

}  // namespace garboost
