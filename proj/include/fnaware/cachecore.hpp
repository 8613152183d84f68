#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "fnaware/errors.hpp"
#include "fnaware/hash.hpp"

namespace fnaware {

// LRU cache over opaque keys. Admission and eviction fire hooks so a
// counting Bloom filter can mirror the content. contains() never touches
// recency; only on_hit() does.
class LruCache {
 public:
  using Hook = std::function<void(const std::string&)>;

  explicit LruCache(std::size_t capacity, Hook on_admit = {}, Hook on_evict = {})
      : capacity_(capacity), on_admit_(std::move(on_admit)), on_evict_(std::move(on_evict)) {
    if (capacity_ == 0) throw InvalidArgument("LruCache: capacity must be positive");
  }

  // Hooks capture `this` of their owner, so the cache is neither copied nor moved.
  LruCache(const LruCache&) = delete;
  LruCache& operator=(const LruCache&) = delete;

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return index_.size(); }

  bool contains(std::string_view key) const { return index_.find(std::string(key)) != index_.end(); }
  bool contains(const std::string& key) const { return index_.find(key) != index_.end(); }
  bool contains(const char* key) const { return contains(std::string_view(key)); }

  void on_hit(const std::string& key) {
    auto it = index_.find(key);
    if (it == index_.end()) throw ContractViolation("LruCache::on_hit: key not cached");
    order_.splice(order_.begin(), order_, it->second);
  }

  std::optional<std::string> admit(const std::string& key) {
    if (index_.count(key)) throw ContractViolation("LruCache::admit: key already cached");
    std::optional<std::string> evicted;
    if (index_.size() == capacity_) {
      evicted = std::move(order_.back());
      order_.pop_back();
      index_.erase(*evicted);
    }
    order_.push_front(key);
    index_.emplace(key, order_.begin());
    if (on_admit_) on_admit_(key);
    if (evicted && on_evict_) on_evict_(*evicted);
    return evicted;
  }

  // Keys from most to least recently used.
  const std::list<std::string>& entries() const noexcept { return order_; }

 private:
  std::size_t capacity_;
  Hook on_admit_;
  Hook on_evict_;
  std::list<std::string> order_;
  std::unordered_map<std::string, std::list<std::string>::iterator> index_;
};

// Controller placement: every missed key goes to exactly one cache.
struct PlacementPolicy {
  std::size_t num_caches = 1;
  std::uint64_t seed = 0;

  std::size_t assign_cache(std::string_view key) const {
    if (num_caches == 0) throw InvalidArgument("PlacementPolicy: num_caches must be positive");
    return static_cast<std::size_t>(murmur64(key, splitmix64(seed ^ 0x706c6163656d6e74ULL)) %
                                    num_caches);
  }
};

inline std::size_t assign_cache(const PlacementPolicy& policy, std::string_view key) {
  return policy.assign_cache(key);
}

}  // namespace fnaware
