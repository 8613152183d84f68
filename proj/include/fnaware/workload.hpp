#pragma once

// Request streams: user-supplied trace files and a seeded Zipf generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fnaware/errors.hpp"
#include "fnaware/hash.hpp"

namespace fnaware {

// Uniform double in [0, 1) from the top 53 bits; portable across stdlibs.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// i.i.d. ranks in [1, universe] with Pr(rank = i) proportional to i^-alpha.
class ZipfGenerator {
 public:
  ZipfGenerator(double alpha, std::uint64_t universe, std::uint64_t seed)
      : cdf_(universe), rng_(seed) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw InvalidArgument("ZipfGenerator: alpha must be positive");
    }
    if (universe == 0) throw InvalidArgument("ZipfGenerator: universe must be positive");
    double acc = 0.0;
    for (std::uint64_t i = 0; i < universe; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -alpha);
      cdf_[i] = acc;
    }
    for (auto& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
  }

  std::uint64_t next_rank() {
    const double u = uniform01(rng_);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
  }

 private:
  std::vector<double> cdf_;
  std::mt19937_64 rng_;
};

inline std::string zipf_key(std::uint64_t rank) { return std::to_string(rank); }

inline std::vector<std::string> zipf_generate(double alpha, std::uint64_t universe,
                                              std::uint64_t length, std::uint64_t seed) {
  ZipfGenerator gen(alpha, universe, seed);
  std::vector<std::string> out;
  out.reserve(length);
  for (std::uint64_t i = 0; i < length; ++i) out.push_back(zipf_key(gen.next_rank()));
  return out;
}

namespace detail {
inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c >> 5) == 0x6) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c >> 4) == 0xe) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c >> 3) == 0x1e) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Reject overlong encodings, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xd800 && cp <= 0xdfff) || cp > 0x10ffff) {
      return false;
    }
    i += len;
  }
  return true;
}
}  // namespace detail

// One key per line; '#' lines and blank lines are skipped; a trailing '\r'
// is stripped.
inline std::vector<std::string> read_trace(std::istream& in) {
  std::vector<std::string> keys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!detail::valid_utf8(line)) throw InputError("trace: invalid UTF-8", lineno);
    keys.push_back(line);
  }
  if (in.bad()) throw InputError("trace: read failure", lineno + 1);
  return keys;
}

inline std::vector<std::string> read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("trace: cannot open '" + path + "'");
  return read_trace(in);
}

// FNV-1a over the key sequence (newline separated); identifies a stream.
inline std::uint64_t stream_checksum(const std::vector<std::string>& keys) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& k : keys) {
    for (const char ch : k) {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fnaware
