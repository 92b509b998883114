#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "garboost/error.hpp"
#include "garboost/selfboost.hpp"

namespace garboost {

namespace {

constexpr char kMagic[8] = {'G', 'B', 'C', 'K', 'P', 'T', '0', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("checkpoint file truncated");
}

void write_vec(std::ofstream& out, const Vec& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_vec(std::ifstream& in, Vec& v, size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw CheckpointError("checkpoint file truncated");
}

}  // namespace

void save_boost_checkpoint(const std::string& path, const RunConfig& cfg,
                           const ToyEmbedder& embedder, const ToyPolicy& policy,
                           size_t completed_iterations, const std::string& label) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);

  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, config_hash(cfg));
  write_pod(out, static_cast<uint32_t>(completed_iterations));
  write_pod(out, embedder.config().hasher.dim);
  write_pod(out, embedder.config().dim_embed);
  write_pod(out, policy.psi_dim());
  write_pod(out, embedder.config().hasher.hash_seed);
  write_pod(out, embedder.config().init_seed);
  write_pod(out, cfg.toy.projection_seed);
  write_pod(out, cfg.boost.seed);
  write_vec(out, embedder.weights());
  write_vec(out, policy.theta());
  write_vec(out, policy.theta_ref());
  if (!out) throw IoError("short write: " + path);
  out.close();

  char hash_hex[17];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  nlohmann::json meta{{"config_hash", std::string(hash_hex)},
                      {"version", kVersion},
                      {"stage", label}};
  std::ofstream meta_out(path + ".meta.json", std::ios::trunc);
  if (!meta_out) throw IoError("cannot write checkpoint sidecar: " + path);
  meta_out << meta.dump(2) << "\n";
}

LoadedCheckpoint load_boost_checkpoint(const std::string& path,
                                       const RunConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path);
  }
  uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  uint64_t stored_hash = 0;
  read_pod(in, stored_hash);
  if (stored_hash != config_hash(cfg)) {
    throw ConfigHashMismatch(
        "checkpoint was produced with a different configuration");
  }

  LoadedCheckpoint ckpt;
  uint32_t completed = 0;
  read_pod(in, completed);
  ckpt.completed_iterations = completed;

  uint32_t dim_feature = 0;
  uint32_t dim_embed = 0;
  uint32_t psi_dim = 0;
  read_pod(in, dim_feature);
  read_pod(in, dim_embed);
  read_pod(in, psi_dim);
  if (dim_feature != cfg.toy.feature_dim || dim_embed != cfg.toy.embed_dim ||
      psi_dim != cfg.toy.psi_dim) {
    throw ConfigHashMismatch("checkpoint dimensions do not match the config");
  }
  uint64_t hash_seed = 0;
  uint64_t init_seed = 0;
  uint64_t projection_seed = 0;
  uint64_t master_seed = 0;
  read_pod(in, hash_seed);
  read_pod(in, init_seed);
  read_pod(in, projection_seed);
  read_pod(in, master_seed);

  read_vec(in, ckpt.weights, static_cast<size_t>(dim_feature) * dim_embed);
  read_vec(in, ckpt.theta, psi_dim);
  read_vec(in, ckpt.theta_ref, psi_dim);
  return ckpt;
}

}  // namespace garboost
