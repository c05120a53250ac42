#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mftd {

// Derives an independent stream seed from (master, purpose, index). Every
// consumer in the pipeline pulls its own counter-keyed stream, so neither
// evaluation order nor thread count can change the draws it sees.
std::uint64_t split_seed(std::uint64_t master, std::string_view purpose, std::uint64_t index);

// xoshiro256++ with explicit state, so streams serialize exactly into
// checkpoints. The gaussian cache is part of the state.
class RandomStream {
 public:
  RandomStream() : RandomStream(0) {}
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();                         // [0, 1)
  double uniform(double lo, double hi);
  std::uint32_t uniform_int(std::uint32_t n);  // [0, n)
  double gauss();                           // standard normal

  std::string serialize() const;
  static RandomStream deserialize(const std::string& text);

 private:
  std::uint64_t s_[4];
  bool has_cache_ = false;
  double cache_ = 0.0;
};

}  // namespace mftd
