#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace fnaware {

// MurmurHash64A (Austin Appleby, public domain), little-endian reads.
inline std::uint64_t murmur64(std::string_view key, std::uint64_t seed) noexcept {
  constexpr std::uint64_t m = 0xc6a4a7935bd1e995ULL;
  constexpr int r = 47;

  const auto len = key.size();
  std::uint64_t h = seed ^ (len * m);

  const unsigned char* data = reinterpret_cast<const unsigned char*>(key.data());
  const std::size_t blocks = len / 8;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::uint64_t k = 0;
    for (int b = 7; b >= 0; --b) k = (k << 8) | data[i * 8 + b];
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
  }

  const unsigned char* tail = data + blocks * 8;
  switch (len & 7) {
    case 7: h ^= std::uint64_t(tail[6]) << 48; [[fallthrough]];
    case 6: h ^= std::uint64_t(tail[5]) << 40; [[fallthrough]];
    case 5: h ^= std::uint64_t(tail[4]) << 32; [[fallthrough]];
    case 4: h ^= std::uint64_t(tail[3]) << 24; [[fallthrough]];
    case 3: h ^= std::uint64_t(tail[2]) << 16; [[fallthrough]];
    case 2: h ^= std::uint64_t(tail[1]) << 8; [[fallthrough]];
    case 1:
      h ^= std::uint64_t(tail[0]);
      h *= m;
  }

  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

// splitmix64 step; used to derive independent sub-seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Pair of 64-bit hashes driving Kirsch-Mitzenmacher double hashing.
struct HashPair {
  std::uint64_t g1;
  std::uint64_t g2;  // always odd
};

inline HashPair hash_pair(std::string_view key, std::uint64_t seed) noexcept {
  return {murmur64(key, seed),
          murmur64(key, splitmix64(seed ^ 0x5bd1e9955bd1e995ULL)) | 1ULL};
}

}  // namespace fnaware
