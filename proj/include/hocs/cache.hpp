#pragma once

// Resumable ensemble cache. Layout:
//   bytes 0..3   magic "HOCS"
//   u32  LE      format version (currently 1)
//   u64  LE      metadata length in bytes
//   ...          metadata: JSON (canonical config fingerprint document plus
//                completed chunk bookkeeping)
//   ...          payload: little-endian IEEE-754 doubles, one block per
//                completed chunk in ascending order; within a chunk, targets
//                in declared order, each as subset sums s = 1..2^n-1 over all
//                scan points followed by the squared-product sums.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hocs/config.hpp"
#include "hocs/correlator.hpp"

namespace hocs {

struct CacheError : std::runtime_error {
  explicit CacheError(const std::string& what) : std::runtime_error(what) {}
};

struct EnsembleCache {
  static constexpr char magic[4] = {'H', 'O', 'C', 'S'};
  static constexpr std::uint32_t version = 1;

  json metadata;
  MomentAccumulator accumulator;
};

namespace detail {

static_assert(sizeof(double) == 8, "payload format requires 8-byte doubles");

inline void put_f64_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap64(bits);
  char b[8];
  std::memcpy(b, &bits, 8);
  out.append(b, 8);
}

inline double get_f64_le(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap64(bits);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_uint_le(const char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

inline std::size_t doubles_per_chunk(const MomentAccumulator& acc) {
  std::size_t n = 0;
  for (const auto& ts : acc.targets) n += (ts.n_subsets() + 1) * ts.Q;
  return n;
}

}  // namespace detail

inline std::string encode_cache(const MomentAccumulator& acc, const RunConfig& config) {
  if (acc.in_chunk != 0)
    throw CacheError("cache: accumulator must be at a chunk boundary");
  json meta;
  meta["config"] = serialize_config(config);
  meta["fingerprint"] = acc.fingerprint;
  meta["first_chunk"] = acc.first_chunk;
  meta["end_chunk"] = acc.end_chunk;
  meta["sample_count"] = acc.sample_count;
  meta["chunk_samples"] = acc.chunk_samples;
  std::string meta_text = meta.dump();

  std::string out;
  out.append(EnsembleCache::magic, 4);
  detail::put_u32_le(out, EnsembleCache::version);
  detail::put_u64_le(out, meta_text.size());
  out += meta_text;
  const std::size_t n_chunks = acc.chunk_samples.size();
  out.reserve(out.size() + 8 * n_chunks * detail::doubles_per_chunk(acc));
  for (std::size_t ci = 0; ci < n_chunks; ++ci) {
    for (const auto& ts : acc.targets) {
      const auto& ch = ts.chunks[ci];
      for (const auto& row : ch.subset)
        for (double v : row) detail::put_f64_le(out, v);
      for (double v : ch.prod_sq) detail::put_f64_le(out, v);
    }
  }
  return out;
}

inline EnsembleCache decode_cache(const std::string& bytes, const CorrelationPlan& plan) {
  if (bytes.size() < 16) throw CacheError("cache: truncated header");
  if (std::memcmp(bytes.data(), EnsembleCache::magic, 4) != 0)
    throw CacheError("cache: bad magic tag");
  std::uint32_t ver =
      static_cast<std::uint32_t>(detail::get_uint_le(bytes.data() + 4, 4));
  if (ver != EnsembleCache::version)
    throw CacheError("cache: unsupported format version " + std::to_string(ver));
  std::uint64_t meta_len = detail::get_uint_le(bytes.data() + 8, 8);
  if (bytes.size() < 16 + meta_len) throw CacheError("cache: truncated metadata");

  EnsembleCache cache;
  try {
    cache.metadata = json::parse(bytes.substr(16, meta_len));
  } catch (const json::exception& e) {
    throw CacheError(std::string("cache: corrupt metadata: ") + e.what());
  }
  const json& m = cache.metadata;
  for (const char* key : {"config", "fingerprint", "first_chunk", "end_chunk", "sample_count",
                          "chunk_samples"})
    if (!m.contains(key)) throw CacheError(std::string("cache: metadata missing '") + key + "'");

  auto acc = MomentAccumulator::make(plan, m.at("fingerprint").get<std::string>(),
                                     m.at("first_chunk").get<std::int64_t>());
  acc.end_chunk = m.at("end_chunk").get<std::int64_t>();
  acc.sample_count = m.at("sample_count").get<std::int64_t>();
  acc.chunk_samples = m.at("chunk_samples").get<std::vector<std::int64_t>>();
  const std::size_t n_chunks = acc.chunk_samples.size();
  if (static_cast<std::int64_t>(n_chunks) != acc.end_chunk - acc.first_chunk)
    throw CacheError("cache: chunk bookkeeping inconsistent");

  std::size_t need = 8 * n_chunks * detail::doubles_per_chunk(acc);
  if (bytes.size() - 16 - meta_len != need)
    throw CacheError("cache: payload length mismatch (truncated or wrong plan)");

  const char* p = bytes.data() + 16 + meta_len;
  for (std::size_t ci = 0; ci < n_chunks; ++ci) {
    for (auto& ts : acc.targets) {
      auto ch = MomentAccumulator::empty_chunk(ts);
      for (auto& row : ch.subset)
        for (double& v : row) { v = detail::get_f64_le(p); p += 8; }
      for (double& v : ch.prod_sq) { v = detail::get_f64_le(p); p += 8; }
      ts.chunks.push_back(std::move(ch));
    }
  }
  cache.accumulator = std::move(acc);
  return cache;
}

inline void save_cache(const MomentAccumulator& acc, const RunConfig& config,
                       const std::string& path) {
  std::string bytes = encode_cache(acc, config);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CacheError("cache: cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CacheError("cache: write failed for '" + path + "'");
}

// Loads and validates against the expected config; the stored sums must have
// been produced by an identical configuration (worker count excluded).
inline EnsembleCache load_cache(const std::string& path, const RunConfig& expected,
                                const CorrelationPlan& plan) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CacheError("cache: cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EnsembleCache cache = decode_cache(bytes, plan);
  if (cache.accumulator.fingerprint != config_fingerprint(expected))
    throw CacheError("cache: stored configuration differs from the requested one");
  return cache;
}

}  // namespace hocs
