#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace dlmc {

// splitmix64 finalizer; full avalanche on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Counter-based Gaussian/uniform stream.
//
// Every draw is a pure function of (master seed, stream id, counter triple),
// so a step can be replayed exactly without storing noise tapes, and distinct
// stream ids (one per replica, plus salted substreams for initialization and
// reference sampling) are independent. The counter triple is
// (iteration, agent, coordinate).
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint64_t stream)
      : seed_(master_seed), stream_(stream) {}

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Derived stream, independent of this one for distinct salts.
  NoiseStream substream(std::uint64_t salt) const {
    return NoiseStream(seed_, mix64(absorb(stream_, salt) ^ 0xa0761d6478bd642fULL));
  }

  // Uniform on (0,1), open at both ends.
  double uniform_at(std::uint64_t iter, std::uint64_t agent, std::uint64_t coord) const {
    return to_unit(mix64(key(iter, agent, coord) ^ 0x517cc1b727220a95ULL));
  }

  // Standard normal via Box-Muller on two decorrelated uniforms.
  double gaussian_at(std::uint64_t iter, std::uint64_t agent, std::uint64_t coord) const {
    const std::uint64_t k = key(iter, agent, coord);
    const double u1 = to_unit(mix64(k ^ 0x517cc1b727220a95ULL));
    const double u2 = to_unit(mix64(k ^ 0x6c62272e07bb0142ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // rows x cols standard normal block for one iteration index.
  Eigen::MatrixXd gaussian_matrix(std::uint64_t iter, Eigen::Index rows, Eigen::Index cols) const {
    Eigen::MatrixXd z(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        z(i, j) = gaussian_at(iter, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
    return z;
  }

 private:
  static std::uint64_t absorb(std::uint64_t state, std::uint64_t v) {
    return mix64(state ^ (mix64(v) + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2)));
  }
  std::uint64_t key(std::uint64_t iter, std::uint64_t agent, std::uint64_t coord) const {
    std::uint64_t s = mix64(seed_ + 0x9e3779b97f4a7c15ULL);
    s = absorb(s, stream_);
    s = absorb(s, iter);
    s = absorb(s, agent);
    s = absorb(s, coord);
    return s;
  }
  // Map to (0,1): 53 mantissa bits, offset by half an ulp so 0 is excluded.
  static double to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace dlmc
