#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace hk {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** keyed by (master_seed, stream_index).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {
    std::uint64_t k = master_seed;
    std::uint64_t mixed = splitmix64(k) ^ (stream_index * 0xD1B54A32D192ED03ULL);
    std::uint64_t sm = mixed;
    for (auto& w : s_) w = splitmix64(sm);
    sm ^= stream_index;
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1).
  double uniform() { return ((*this)() >> 11 | 1) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4]{};
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace hk
