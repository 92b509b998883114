#include "garboost/toy_embedder.hpp"

#include <cmath>
#include <cstring>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

ToyEmbedder::ToyEmbedder(ToyEmbedderConfig cfg)
    : cfg_(cfg), hasher_(cfg.hasher) {
  if (cfg_.dim_embed == 0) throw ConfigError("toy embedder: dim_embed must be > 0");
  const size_t total = static_cast<size_t>(cfg_.hasher.dim) * cfg_.dim_embed;
  w_.resize(total);
  // i.i.d. uniform in [-1/sqrt(dim_D), +1/sqrt(dim_D)]
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg_.hasher.dim));
  Rng rng(cfg_.init_seed);
  for (size_t i = 0; i < total; ++i) {
    w_[i] = (2.0 * rng.next_double() - 1.0) * scale;
  }
}

Vec ToyEmbedder::project(const SparseVector& features) const {
  Vec y(cfg_.dim_embed, 0.0);
  const size_t d = cfg_.dim_embed;
  for (const auto& [bucket, weight] : features.entries) {
    if (bucket >= cfg_.hasher.dim) {
      throw DimMismatch("toy embedder: feature bucket out of range");
    }
    const double* row = w_.data() + static_cast<size_t>(bucket) * d;
    for (size_t j = 0; j < d; ++j) y[j] += weight * row[j];
  }
  return y;
}

EmbedResult ToyEmbedder::embed_features(const SparseVector& features) const {
  EmbedResult res;
  res.vector = project(features);
  double n = l2_norm(res.vector);
  if (n == 0.0) {
    res.is_zero = true;
    return res;
  }
  if (cfg_.normalize) {
    const double inv = 1.0 / n;
    for (double& x : res.vector) x *= inv;
  }
  return res;
}

EmbedResult ToyEmbedder::embed(std::string_view text) const {
  return embed_features(hasher_.featurize(text));
}

void ToyEmbedder::set_weights(Vec w) {
  if (w.size() != w_.size()) throw DimMismatch("toy embedder: weight size mismatch");
  w_ = std::move(w);
  fingerprint_valid_ = false;
}

uint64_t ToyEmbedder::fingerprint() const {
  if (!fingerprint_valid_) {
    uint64_t h = fnv1a64("toy-embedder-v1");
    h = splitmix64(h ^ cfg_.hasher.dim);
    h = splitmix64(h ^ cfg_.hasher.ngram_min);
    h = splitmix64(h ^ cfg_.hasher.ngram_max);
    h = splitmix64(h ^ cfg_.hasher.hash_seed);
    h = splitmix64(h ^ cfg_.dim_embed);
    h = splitmix64(h ^ (cfg_.normalize ? 1 : 0));
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(w_.data()),
                                 w_.size() * sizeof(double)),
                h);
    fingerprint_ = h;
    fingerprint_valid_ = true;
  }
  return fingerprint_;
}

}  // namespace garboost
