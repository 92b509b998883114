#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "garboost/feature_hasher.hpp"
#include "garboost/vecmath.hpp"

namespace garboost {

struct ToyEmbedderConfig {
  FeatureHasherConfig hasher;
  uint32_t dim_embed = 128;  // dim_d
  uint64_t init_seed = 7;
  bool normalize = true;
};

// Linear text embedder: a hashed character n-gram vector projected through a
// trainable dim_D x dim_d matrix W, optionally L2-normalized. Queries and
// documents share the one encoder.
class ToyEmbedder {
 public:
  explicit ToyEmbedder(ToyEmbedderConfig cfg);

  // W^T phi without normalization.
  Vec project(const SparseVector& features) const;

  EmbedResult embed_features(const SparseVector& features) const;
  EmbedResult embed(std::string_view text) const;

  const FeatureHasher& hasher() const { return hasher_; }
  const ToyEmbedderConfig& config() const { return cfg_; }
  uint32_t dim() const { return cfg_.dim_embed; }
  bool normalize() const { return cfg_.normalize; }

  // Row-major weights, dim_D rows of dim_embed; mutable access is for the
  // training loop, which must call invalidate_fingerprint() afterwards.
  const Vec& weights() const { return w_; }
  Vec& mutable_weights() { return w_; }
  void set_weights(Vec w);
  void invalidate_fingerprint() { fingerprint_valid_ = false; }

  // Hash of (config, W); identifies the parameters an index was built with.
  uint64_t fingerprint() const;

 private:
  ToyEmbedderConfig cfg_;
  FeatureHasher hasher_;
  Vec w_;  // dim_D * dim_embed, row-major
  mutable uint64_t fingerprint_ = 0;
  mutable bool fingerprint_valid_ = false;
};

}  // namespace garboost
