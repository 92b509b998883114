#include "garboost/dense_index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "garboost/error.hpp"
#include "garboost/rng.hpp"

namespace garboost {

namespace {

constexpr char kMagic[8] = {'G', 'B', 'I', 'D', 'X', '0', '1', '\0'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("index file truncated");
}

}  // namespace

DenseIndex DenseIndex::build(const Corpus& corpus, Retriever& retriever,
                             size_t batch_size) {
  if (corpus.docs.empty()) throw EmptyCorpus("cannot index an empty corpus");
  if (batch_size == 0) batch_size = 1;

  DenseIndex index;
  index.dim_ = retriever.dim();
  index.fingerprint_ = retriever.fingerprint();
  index.ids_.reserve(corpus.size());
  index.matrix_.reserve(corpus.size() * index.dim_);

  for (size_t start = 0; start < corpus.docs.size(); start += batch_size) {
    const size_t end = std::min(start + batch_size, corpus.docs.size());
    std::vector<std::string> texts;
    texts.reserve(end - start);
    for (size_t i = start; i < end; ++i) {
      texts.push_back(corpus.docs[i].embedding_text());
    }
    auto batch = retriever.embed_batch(texts);
    for (size_t i = start; i < end; ++i) {
      const auto& row = batch.rows[i - start];
      if (row.size() != index.dim_) {
        throw DimMismatch("backend returned row of width " +
                          std::to_string(row.size()) + ", expected " +
                          std::to_string(index.dim_));
      }
      index.ids_.push_back(corpus.docs[i].id);
      index.matrix_.insert(index.matrix_.end(), row.begin(), row.end());
      if (batch.zero_flags[i - start]) {
        index.zero_rows_.push_back(corpus.docs[i].id);
      }
    }
  }
  return index;
}

std::vector<SearchHit> DenseIndex::search(const Vec& query_vector, size_t k) const {
  if (query_vector.size() != dim_) {
    throw DimMismatch("search: query dim " + std::to_string(query_vector.size()) +
                      " != index dim " + std::to_string(dim_));
  }
  if (k == 0) return {};

  std::vector<size_t> order(ids_.size());
  std::vector<double> scores(ids_.size());
  for (size_t i = 0; i < ids_.size(); ++i) {
    const double* row = matrix_.data() + i * dim_;
    double s = 0.0;
    for (size_t j = 0; j < dim_; ++j) s += row[j] * query_vector[j];
    scores[i] = s;
    order[i] = i;
  }
  auto better = [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids_[a] < ids_[b];
  };
  const size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(), better);

  std::vector<SearchHit> hits;
  hits.reserve(take);
  for (size_t i = 0; i < take; ++i) {
    hits.push_back({ids_[order[i]], scores[order[i]]});
  }
  return hits;
}

std::vector<std::string> DenseIndex::mine_hard_negatives(
    const Vec& query_vector, const std::vector<std::string>& exclude_ids,
    size_t rank_lo, size_t rank_hi, size_t m, uint64_t seed) const {
  if (rank_lo < 1 || rank_lo > rank_hi) {
    throw Error("mine_hard_negatives: require 1 <= a <= b");
  }
  if (m == 0) return {};

  auto full = search(query_vector, ids_.size());
  std::unordered_set<std::string> excluded(exclude_ids.begin(), exclude_ids.end());
  std::vector<std::string> remaining;
  remaining.reserve(full.size());
  for (auto& hit : full) {
    if (!excluded.count(hit.doc_id)) remaining.push_back(std::move(hit.doc_id));
  }
  if (remaining.empty() || rank_lo > remaining.size()) return {};
  const size_t lo = rank_lo - 1;
  const size_t hi = std::min(rank_hi, remaining.size());  // exclusive end
  const size_t window = hi - lo;

  Rng rng(seed);
  auto picks = rng.sample_without_replacement(window, std::min(m, window));
  std::vector<std::string> out;
  out.reserve(picks.size());
  for (size_t p : picks) out.push_back(remaining[lo + p]);
  return out;
}

Vec DenseIndex::row(size_t i) const {
  if (i >= ids_.size()) throw Error("index row out of range");
  return Vec(matrix_.begin() + i * dim_, matrix_.begin() + (i + 1) * dim_);
}

bool DenseIndex::contains(const std::string& doc_id) const {
  return std::find(ids_.begin(), ids_.end(), doc_id) != ids_.end();
}

void DenseIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write index: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, dim_);
  const uint64_t n = ids_.size();
  write_pod(out, n);
  write_pod(out, fingerprint_);
  for (const auto& id : ids_) {
    const uint32_t len = static_cast<uint32_t>(id.size());
    write_pod(out, len);
    out.write(id.data(), len);
  }
  for (double v : matrix_) {
    const float f = static_cast<float>(v);
    write_pod(out, f);
  }
  if (!out) throw IoError("short write: " + path);
}

DenseIndex DenseIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read index: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not an index file: " + path);
  }
  uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion) {
    throw IoError("unsupported index version " + std::to_string(version));
  }
  DenseIndex index;
  read_pod(in, index.dim_);
  uint64_t n = 0;
  read_pod(in, n);
  read_pod(in, index.fingerprint_);
  index.ids_.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    uint32_t len = 0;
    read_pod(in, len);
    std::string id(len, '\0');
    in.read(id.data(), len);
    if (!in) throw IoError("index file truncated");
    index.ids_.push_back(std::move(id));
  }
  index.matrix_.resize(n * index.dim_);
  for (auto& v : index.matrix_) {
    float f = 0.0f;
    read_pod(in, f);
    v = static_cast<double>(f);
  }
  return index;
}

}  // namespace garboost
