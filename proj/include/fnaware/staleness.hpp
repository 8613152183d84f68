#pragma once

// Staleness diff between a cache's updated filter and the replica it last
// advertised, and the fnr / fpr estimates derived from it.

#include <bit>
#include <cmath>
#include <cstdint>

#include "fnaware/errors.hpp"
#include "fnaware/probfilter.hpp"

namespace fnaware {

struct DeltaStats {
  std::uint64_t b1 = 0;  // set in updated
  std::uint64_t b0 = 0;  // reset in updated
  std::uint64_t d1 = 0;  // set in updated, reset in stale
  std::uint64_t d0 = 0;  // reset in updated, set in stale
  std::uint64_t num_bits = 0;
};

inline DeltaStats delta_stats(const BloomFilter& stale, const BloomFilter& updated) {
  if (!stale.params().same_layout(updated.params())) {
    throw InvalidArgument("delta_stats: stale and updated filters have different parameters");
  }
  DeltaStats ds;
  ds.num_bits = updated.num_bits();
  const auto s = stale.words();
  const auto u = updated.words();
  for (std::size_t i = 0; i < u.size(); ++i) {
    ds.b1 += static_cast<std::uint64_t>(std::popcount(u[i]));
    ds.d1 += static_cast<std::uint64_t>(std::popcount(u[i] & ~s[i]));
    ds.d0 += static_cast<std::uint64_t>(std::popcount(~u[i] & s[i]));
  }
  ds.b0 = ds.num_bits - ds.b1;
  return ds;
}

// 1 - ((b1 - d1) / b1)^k; an empty updated filter (b1 = 0) yields 0.
inline double estimate_fnr(const DeltaStats& ds, std::uint32_t k) {
  if (ds.b1 == 0) return 0.0;
  const double kept = static_cast<double>(ds.b1 - ds.d1) / static_cast<double>(ds.b1);
  return 1.0 - std::pow(kept, static_cast<double>(k));
}

// ((b1 - d1 + d0) / m)^k: fill ratio of the stale filter raised to k.
inline double estimate_fpr(const DeltaStats& ds, std::uint32_t k) {
  if (ds.num_bits == 0) throw InvalidArgument("estimate_fpr: num_bits must be positive");
  const double stale_set = static_cast<double>(ds.b1 - ds.d1 + ds.d0);
  return std::pow(stale_set / static_cast<double>(ds.num_bits), static_cast<double>(k));
}

}  // namespace fnaware
