#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mtmv {

/// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Each
/// 128-bit counter block maps to four independent 32-bit words under a
/// 64-bit key; there is no sequential state, so any (key, counter) cell can
/// be evaluated in isolation and in any order.
struct Philox4x32 {
  static constexpr std::uint32_t kW32A = 0x9E3779B9u;
  static constexpr std::uint32_t kW32B = 0xBB67AE85u;
  static constexpr std::uint32_t kM4x32A = 0xD2511F53u;
  static constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

  static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                            std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM4x32A) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM4x32B) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += kW32A;
      k1 += kW32B;
    }
    return ctr;
  }
};

/// Standard normal increments addressed by (seed, path, step, lane). One
/// Philox block keyed by the seed with counter (path_lo, path_hi, step,
/// block) yields four normals via Box-Muller, so results are bit-identical
/// regardless of evaluation order or parallel scheduling.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path) : seed_(seed), path_(path) {}

  /// Fills `count` normals for the given step index.
  void fill(std::uint32_t step, double* out, int count) const {
    for (int base = 0; base < count; base += 4) {
      const auto words = Philox4x32::block(
          seed_, {static_cast<std::uint32_t>(path_),
                  static_cast<std::uint32_t>(path_ >> 32), step,
                  static_cast<std::uint32_t>(base / 4)});
      double z[4];
      box_muller(words[0], words[1], z[0], z[1]);
      box_muller(words[2], words[3], z[2], z[3]);
      for (int j = 0; j < 4 && base + j < count; ++j) out[base + j] = z[j];
    }
  }

  /// First normal of the step; the common single-noise fast path.
  double first(std::uint32_t step) const {
    const auto words = Philox4x32::block(
        seed_, {static_cast<std::uint32_t>(path_),
                static_cast<std::uint32_t>(path_ >> 32), step, 0u});
    const double u1 = to_unit(words[0]);
    const double u2 = to_unit(words[1]);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static double to_unit(std::uint32_t w) {
    return (static_cast<double>(w) + 0.5) * 0x1p-32;
  }

  static void box_muller(std::uint32_t w0, std::uint32_t w1, double& z0, double& z1) {
    const double u1 = to_unit(w0);
    const double u2 = to_unit(w1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
  }

  std::uint64_t seed_;
  std::uint64_t path_;
};

}  // namespace mtmv
