#include "core/rng.hpp"

#include <cmath>

namespace fibermc {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

inline std::array<uint32_t, 4> round_once(const std::array<uint32_t, 4>& c,
                                          uint32_t k0, uint32_t k1) {
  uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace

std::array<uint32_t, 4> Philox4x32::block(const std::array<uint32_t, 2>& key,
                                          std::array<uint32_t, 4> ctr) {
  uint32_t k0 = key[0], k1 = key[1];
  for (int r = 0; r < 10; ++r) {
    ctr = round_once(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

void NormalStream::fill(double* out, int n) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  int produced = 0;
  while (produced < n) {
    auto w = Philox4x32::block(key_, ctr_);
    ctr_[3] += 1;
    uint64_t a = (static_cast<uint64_t>(w[0]) << 32) | w[1];
    uint64_t b = (static_cast<uint64_t>(w[2]) << 32) | w[3];
    // 53-bit mantissas shifted into (0,1).
    double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    out[produced++] = r * std::cos(kTwoPi * u2);
    if (produced < n) out[produced++] = r * std::sin(kTwoPi * u2);
  }
}

}  // namespace fibermc
