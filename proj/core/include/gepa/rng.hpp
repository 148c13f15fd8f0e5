#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace gepa {

// Seeded generator used by all sampling sites. mt19937_64 output is pinned
// by the standard; bounded draws are hand-rolled because the behaviour of
// std::uniform_int_distribution is implementation-defined and would break
// replay across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Unbiased draw in [0, n); rejection sampled.
  std::uint64_t bounded(std::uint64_t n);

  std::string state_digest() const;

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gepa
