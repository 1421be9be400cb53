#pragma once

#include <cstdint>
#include <random>

namespace dbo {

// Deterministic random stream with a platform-stable mapping from engine
// output to doubles. std::mt19937_64 is bit-exact everywhere by standard;
// the uniform and normal transforms below avoid the library-defined
// distributions, whose rounding is implementation specific.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are cached.
  double normal();

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dbo
