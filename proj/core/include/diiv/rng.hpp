#pragma once

#include <cstdint>

#include "diiv/normal.hpp"

namespace diiv {

// Reproducibility contract for the simulator, fixed by construction:
//
//   * stream key for trial t:  mix64(seed + (t + 1) * 0xD1B54A32D192ED03)
//   * the stream itself is SplitMix64 started at that key
//   * uniforms map the top 53 bits to the open interval (0,1)
//   * normals are normal_quantile(uniform) — exactly one draw each
//
// Every trial owns an independent stream, so trial t is reproducible in
// isolation and results do not depend on execution order.
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial)
      : state_(mix64(seed + (trial + 1) * 0xD1B54A32D192ED03ull)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double gaussian() { return normal_quantile(uniform_open01()); }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace diiv
