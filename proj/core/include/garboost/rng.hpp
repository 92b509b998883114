#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace garboost {

// SplitMix64 step, used to mix seeds and to derive per-purpose substreams.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a 64-bit over bytes. Non-cryptographic; used for config hashes,
// fingerprints and seed derivation from strings.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a master seed, a purpose tag and
// indices. Every stochastic operation in the pipeline draws from a stream
// derived this way, so runs are reproducible stage by stage.
inline uint64_t derive_seed(uint64_t master, std::string_view purpose,
                            uint64_t a = 0, uint64_t b = 0) {
  uint64_t h = splitmix64(master ^ fnv1a64(purpose));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

// Deterministic RNG. std::mt19937_64 has a fully specified bit stream; the
// mappings to doubles and bounded integers below are implemented explicitly
// (not via std::uniform_*_distribution, whose output is implementation
// defined), so draws are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased via rejection sampling. n must be > 0.
  uint64_t next_index(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  // Selects k distinct indices from [0, n) by partial Fisher-Yates shuffle:
  // for i in 0..k-1 swap position i with a uniform position in [i, n); the
  // first k entries, in selection order, are the sample.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
    if (k > n) k = n;
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(next_index(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

  // In-place Fisher-Yates shuffle of the whole range.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace garboost
