#pragma once

// Bloom filter and 3-bit counting Bloom filter primitives, plus the
// advertised-indicator wire format.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnaware/errors.hpp"
#include "fnaware/hash.hpp"

namespace fnaware {

struct FilterParams {
  std::uint64_t num_bits = 1;
  std::uint32_t num_hashes = 1;
  double bpe = 1.0;  // informational; 0 when decoded from the wire
  std::uint64_t seed = 0;

  // Two filters are interchangeable iff their wire-visible fields agree.
  bool same_layout(const FilterParams& o) const noexcept {
    return num_bits == o.num_bits && num_hashes == o.num_hashes && seed == o.seed;
  }
};

// max(1, round(bpe * ln 2)).
inline std::uint32_t optimal_hash_count(double bpe) {
  if (!(bpe > 0.0) || !std::isfinite(bpe)) {
    throw InvalidArgument("optimal_hash_count: bpe must be positive");
  }
  const double k = std::round(bpe * std::log(2.0));
  return k < 1.0 ? 1u : static_cast<std::uint32_t>(k);
}

// Filter sized for a cache of `capacity` items: m = ceil(bpe * capacity).
inline FilterParams make_filter_params(double bpe, std::uint64_t capacity,
                                       std::uint64_t seed) {
  if (capacity == 0) throw InvalidArgument("make_filter_params: capacity must be positive");
  FilterParams p;
  p.num_hashes = optimal_hash_count(bpe);
  p.num_bits = static_cast<std::uint64_t>(std::ceil(bpe * static_cast<double>(capacity)));
  p.bpe = bpe;
  p.seed = seed;
  if (p.num_bits < p.num_hashes) {
    throw InvalidArgument("make_filter_params: num_bits (" + std::to_string(p.num_bits) +
                          ") below num_hashes (" + std::to_string(p.num_hashes) + ")");
  }
  return p;
}

// Visits the k positions of a pre-hashed key: (g1 + i*g2) mod m, i = 0..k-1.
template <class Fn>
inline void for_each_position(const HashPair& hp, const FilterParams& params, Fn&& fn) {
  const std::uint64_t m = params.num_bits;
  const std::uint64_t step = hp.g2 % m;
  std::uint64_t pos = hp.g1 % m;
  for (std::uint32_t i = 0; i < params.num_hashes; ++i) {
    fn(pos);
    pos += step;
    if (pos >= m) pos -= m;
  }
}

inline std::vector<std::uint64_t> hash_positions(std::string_view key,
                                                 const FilterParams& params) {
  std::vector<std::uint64_t> out;
  out.reserve(params.num_hashes);
  for_each_position(hash_pair(key, params.seed), params,
                    [&](std::uint64_t p) { out.push_back(p); });
  return out;
}

class BloomFilter {
 public:
  BloomFilter() = default;
  explicit BloomFilter(const FilterParams& params)
      : params_(params), words_((params.num_bits + 63) / 64, 0) {}

  const FilterParams& params() const noexcept { return params_; }
  std::uint64_t num_bits() const noexcept { return params_.num_bits; }

  bool test(std::uint64_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  void set(std::uint64_t i) noexcept { words_[i >> 6] |= 1ULL << (i & 63); }
  void reset(std::uint64_t i) noexcept { words_[i >> 6] &= ~(1ULL << (i & 63)); }

  void insert(std::string_view key) { insert(hash_pair(key, params_.seed)); }
  void insert(const HashPair& hp) {
    for_each_position(hp, params_, [&](std::uint64_t p) { set(p); });
  }

  bool contains(std::string_view key) const { return contains(hash_pair(key, params_.seed)); }
  bool contains(const HashPair& hp) const {
    bool all = true;
    for_each_position(hp, params_, [&](std::uint64_t p) { all = all && test(p); });
    return all;
  }

  std::uint64_t count_set() const noexcept {
    std::uint64_t n = 0;
    for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
  }

  double fill_ratio() const noexcept {
    return static_cast<double>(count_set()) / static_cast<double>(params_.num_bits);
  }

  // Bits past num_bits in the last word are always zero.
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const BloomFilter& a, const BloomFilter& b) {
    return a.params_.same_layout(b.params_) && a.words_ == b.words_;
  }

 private:
  FilterParams params_{};
  std::vector<std::uint64_t> words_;
};

// 1 iff every bit at hash_positions(key) is set.
inline bool query(const BloomFilter& bf, std::string_view key) { return bf.contains(key); }

class CountingBloomFilter {
 public:
  static constexpr std::uint8_t kCounterMax = 7;  // 3-bit counters

  CountingBloomFilter() = default;
  explicit CountingBloomFilter(const FilterParams& params)
      : counters_(params.num_bits, 0), live_(params) {}

  const FilterParams& params() const noexcept { return live_.params(); }

  void insert(std::string_view key) { insert(hash_pair(key, params().seed)); }
  void insert(const HashPair& hp) {
    for_each_position(hp, params(), [&](std::uint64_t p) {
      auto& c = counters_[p];
      if (c < kCounterMax) ++c;
      live_.set(p);
    });
  }

  // Saturated counters are sticky: once at 7 they are never decremented.
  void remove(std::string_view key) { remove(hash_pair(key, params().seed)); }
  void remove(const HashPair& hp) {
    for_each_position(hp, params(), [&](std::uint64_t p) {
      auto& c = counters_[p];
      if (c == 0 || c == kCounterMax) return;
      if (--c == 0) live_.reset(p);
    });
  }

  std::uint8_t counter(std::uint64_t i) const { return counters_[i]; }
  std::span<const std::uint8_t> counters() const noexcept { return counters_; }

  // Bit i set iff counters[i] > 0. Maintained incrementally.
  const BloomFilter& compressed_view() const noexcept { return live_; }
  BloomFilter compress() const { return live_; }

  // Test hook: overwrite the counter vector directly.
  static CountingBloomFilter from_counters(const FilterParams& params,
                                           std::span<const std::uint8_t> counters) {
    if (counters.size() != params.num_bits) {
      throw InvalidArgument("from_counters: counter vector length differs from num_bits");
    }
    CountingBloomFilter cbf(params);
    for (std::size_t i = 0; i < counters.size(); ++i) {
      cbf.counters_[i] = std::min<std::uint8_t>(counters[i], kCounterMax);
      if (cbf.counters_[i] > 0) cbf.live_.set(i);
    }
    return cbf;
  }

 private:
  std::vector<std::uint8_t> counters_;
  BloomFilter live_;
};

inline void cbf_insert(CountingBloomFilter& cbf, std::string_view key) { cbf.insert(key); }
inline void cbf_remove(CountingBloomFilter& cbf, std::string_view key) { cbf.remove(key); }
inline BloomFilter compress(const CountingBloomFilter& cbf) { return cbf.compress(); }

// Wire format, all integers little-endian:
//   u64 num_bits | u16 num_hashes | u64 seed | u64 byte_len | byte_len bytes
// Bit i of the filter is bit (i % 8) of byte (i / 8).
namespace detail {
inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint64_t get_le(std::string_view in, std::size_t off, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)]);
  }
  return v;
}
}  // namespace detail

inline std::string serialize(const BloomFilter& bf) {
  const auto& p = bf.params();
  if (p.num_hashes > 0xffff) throw InvalidArgument("serialize: num_hashes exceeds u16");
  const std::uint64_t nbytes = (p.num_bits + 7) / 8;
  std::string out;
  out.reserve(26 + nbytes);
  detail::put_le(out, p.num_bits, 8);
  detail::put_le(out, p.num_hashes, 2);
  detail::put_le(out, p.seed, 8);
  detail::put_le(out, nbytes, 8);
  const auto words = bf.words();
  for (std::uint64_t b = 0; b < nbytes; ++b) {
    out.push_back(static_cast<char>((words[b / 8] >> (8 * (b % 8))) & 0xff));
  }
  return out;
}

inline BloomFilter deserialize(std::string_view in) {
  constexpr std::size_t kHeader = 26;
  if (in.size() < kHeader) throw InputError("indicator snapshot: truncated header");
  FilterParams p;
  p.num_bits = detail::get_le(in, 0, 8);
  p.num_hashes = static_cast<std::uint32_t>(detail::get_le(in, 8, 2));
  p.seed = detail::get_le(in, 10, 8);
  p.bpe = 0.0;
  const std::uint64_t nbytes = detail::get_le(in, 18, 8);
  if (p.num_bits == 0 || p.num_hashes == 0 || p.num_bits < p.num_hashes) {
    throw InputError("indicator snapshot: invalid filter parameters");
  }
  if (nbytes != (p.num_bits + 7) / 8) throw InputError("indicator snapshot: length mismatch");
  if (in.size() != kHeader + nbytes) throw InputError("indicator snapshot: truncated payload");
  BloomFilter bf(p);
  for (std::uint64_t i = 0; i < p.num_bits; ++i) {
    const auto byte = static_cast<unsigned char>(in[kHeader + i / 8]);
    if ((byte >> (i % 8)) & 1u) bf.set(i);
  }
  // Padding bits beyond num_bits must be clear.
  if (p.num_bits % 8 != 0) {
    const auto last = static_cast<unsigned char>(in[kHeader + nbytes - 1]);
    if (last >> (p.num_bits % 8)) throw InputError("indicator snapshot: nonzero padding bits");
  }
  return bf;
}

}  // namespace fnaware
