#include "mftd/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace mftd {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::string_view purpose, std::uint64_t index) {
  std::uint64_t state = master ^ fnv1a(purpose) ^ (index * 0x9e3779b97f4a7c15ULL);
  splitmix64(state);
  return splitmix64(state);
}

RandomStream::RandomStream(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint32_t RandomStream::uniform_int(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Lemire's multiply-shift rejection method.
  std::uint64_t x = next_u64() >> 32;
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto lo = static_cast<std::uint64_t>(m & 0xffffffffULL);
  if (lo < n) {
    const std::uint64_t threshold = (0x100000000ULL - n) % n;
    while (lo < threshold) {
      x = next_u64() >> 32;
      m = static_cast<__uint128_t>(x) * n;
      lo = static_cast<std::uint64_t>(m & 0xffffffffULL);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

double RandomStream::gauss() {
  if (has_cache_) {
    has_cache_ = false;
    return cache_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cache_ = v * f;
  has_cache_ = true;
  return u * f;
}

std::string RandomStream::serialize() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%llu %llu %llu %llu %d %la",
                static_cast<unsigned long long>(s_[0]), static_cast<unsigned long long>(s_[1]),
                static_cast<unsigned long long>(s_[2]), static_cast<unsigned long long>(s_[3]),
                has_cache_ ? 1 : 0, cache_);
  return buf;
}

RandomStream RandomStream::deserialize(const std::string& text) {
  RandomStream r(0);
  unsigned long long s0, s1, s2, s3;
  int has_cache;
  double cache;
  if (std::sscanf(text.c_str(), "%llu %llu %llu %llu %d %la", &s0, &s1, &s2, &s3, &has_cache,
                  &cache) != 6)
    throw std::runtime_error("RandomStream: malformed state string");
  r.s_[0] = s0;
  r.s_[1] = s1;
  r.s_[2] = s2;
  r.s_[3] = s3;
  r.has_cache_ = has_cache != 0;
  r.cache_ = cache;
  return r;
}

}  // namespace mftd
