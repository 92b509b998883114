#include "garboost/call_cache.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "garboost/error.hpp"

namespace garboost {

namespace fs = std::filesystem;
using nlohmann::json;

bool network_disabled() {
  const char* v = std::getenv("NO_NETWORK");
  return v != nullptr && std::string(v) == "1";
}

CallCache::CallCache(std::string directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_ + ": " + ec.message());
}

std::string CallCache::key_for(const std::string& endpoint, const std::string& model,
                               const std::string& request_body) {
  const std::string material = endpoint + "\n" + model + "\n" + request_body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string CallCache::record_path(const std::string& key) const {
  return (fs::path(dir_) / (key + ".json")).string();
}

std::optional<std::string> CallCache::lookup(const std::string& key) const {
  const std::string path = record_path(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    json rec = json::parse(ss.str());
    return rec.at("response").get<std::string>();
  } catch (const json::exception& e) {
    std::cerr << "warning: corrupted cache record " << path << " (" << e.what()
              << "), treating as miss\n";
    return std::nullopt;
  }
}

void CallCache::store(const std::string& key, const std::string& request_body,
                      const std::string& response_body) const {
  json rec{{"request", request_body},
           {"response", response_body},
           {"timestamp",
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count()}};
  const std::string path = record_path(key);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache record " + tmp);
    out << rec.dump();
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot finalize cache record " + path + ": " + ec.message());
}

std::string CallCache::cached_call(
    const std::string& endpoint, const std::string& model,
    const std::string& request_body,
    const std::function<std::string()>& transport) const {
  const std::string key = key_for(endpoint, model, request_body);
  if (auto cached = lookup(key)) {
    ++hits_;
    return *cached;
  }
  ++misses_;
  if (network_disabled()) {
    throw NoNetwork("NO_NETWORK=1 and cache miss for " + endpoint);
  }
  std::string response = transport();
  store(key, request_body, response);
  return response;
}

}  // namespace garboost
