#pragma once

#include <array>
#include <cstdint>

namespace fibermc {

// Philox4x32-10 counter-based generator. A draw is addressed by
// (seed, path, step, block), so any path can be generated independently of
// all others and results do not depend on scheduling.
struct Philox4x32 {
  static std::array<uint32_t, 4> block(const std::array<uint32_t, 2>& key,
                                       std::array<uint32_t, 4> ctr);
};

// Standard normal draws for one (path, step) cell. Each 128-bit Philox block
// yields two normals via Box-Muller; blocks advance along the last counter
// word.
class NormalStream {
 public:
  NormalStream(uint64_t seed, uint64_t path, uint32_t step)
      : key_{static_cast<uint32_t>(seed & 0xffffffffu),
             static_cast<uint32_t>(seed >> 32)},
        ctr_{static_cast<uint32_t>(path & 0xffffffffu),
             static_cast<uint32_t>(path >> 32), step, 0} {}

  void fill(double* out, int n);

 private:
  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> ctr_;
};

}  // namespace fibermc
