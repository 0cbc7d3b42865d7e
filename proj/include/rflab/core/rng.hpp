#pragma once

#include <array>
#include <cstdint>

#include "rflab/core/types.hpp"

// Counter-based random streams (Philox-4x32-10). Every consumer owns a
// stream keyed by (seed, stream id); draws depend only on (key, counter), so
// results are reproducible independently of thread scheduling.
namespace rflab {

class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    ctr_[0] = 0;
    ctr_[1] = 0;
    ctr_[2] = static_cast<std::uint32_t>(stream);
    ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
    buf_pos_ = 4;
  }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) refill();
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void refill() {
    std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(kM0, c0, hi0, lo0);
      mulhilo(kM1, c2, hi1, lo1);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += kW0; k1 += kW1;
    }
    buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
    buf_pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_;
  int buf_pos_;
};

// Uniform direction on the unit sphere. Consumes a fixed number of draws so
// streams stay aligned across dimensions of use.
template <int N> Vec<N> unit_sphere_dir(Philox& rng);

template <> inline Vec<2> unit_sphere_dir<2>(Philox& rng) {
  double a = 2.0 * M_PI * rng.next_double();
  return Vec<2>(std::cos(a), std::sin(a));
}

template <> inline Vec<3> unit_sphere_dir<3>(Philox& rng) {
  double z = 2.0 * rng.next_double() - 1.0;
  double phi = 2.0 * M_PI * rng.next_double();
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec<3>(r * std::cos(phi), r * std::sin(phi), z);
}

template <int N> Vec<N> uniform_in_box(const Box<N>& b, Philox& rng) {
  Vec<N> p;
  for (int i = 0; i < N; ++i) p[i] = rng.uniform(b.min()[i], b.max()[i]);
  return p;
}

template <int N> Mat<N> random_rotation(Philox& rng) {
  if constexpr (N == 2) {
    return rotation_from_angles<2>({rng.uniform(0, 2 * M_PI), 0, 0});
  } else {
    return rotation_from_angles<3>({rng.uniform(0, 2 * M_PI),
                                    rng.uniform(0, 2 * M_PI),
                                    rng.uniform(0, 2 * M_PI)});
  }
}

}  // namespace rflab
