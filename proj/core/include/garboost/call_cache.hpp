#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

namespace garboost {

// Content-addressed disk cache for backend calls. The key is the SHA-256 of
// (endpoint, model, request payload); a record stores the request bytes, the
// response bytes and a timestamp. A corrupted record is treated as a miss
// with a warning on stderr. When the NO_NETWORK environment variable is "1",
// any miss raises NoNetwork instead of invoking the transport.
class CallCache {
 public:
  explicit CallCache(std::string directory);

  static std::string key_for(const std::string& endpoint, const std::string& model,
                             const std::string& request_body);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& request_body,
             const std::string& response_body) const;

  // Hit: returns the stored response without touching the network. Miss:
  // calls transport(), stores and returns its result.
  std::string cached_call(const std::string& endpoint, const std::string& model,
                          const std::string& request_body,
                          const std::function<std::string()>& transport) const;

  const std::string& directory() const { return dir_; }

  size_t hits() const { return hits_; }
  size_t misses() const { return misses_; }

 private:
  std::string record_path(const std::string& key) const;

  std::string dir_;
  mutable size_t hits_ = 0;
  mutable size_t misses_ = 0;
};

bool network_disabled();

}  // namespace garboost
