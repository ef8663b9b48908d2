#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boundeff/numerics.hpp"

namespace boundeff {

// Uniformly sampled real signal.
class Signal {
 public:
  Signal() = default;
  Signal(RealVector samples, double fs);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double fs() const { return fs_; }

  double operator[](std::size_t i) const { return samples_[i]; }
  const RealVector& vector() const { return samples_; }

 private:
  RealVector samples_;
  double fs_ = 1.0;
};

struct HarmonicComponent {
  double amplitude = 1.0;  // > 0
  double frequency = 0.0;  // Hz, below fs/2
  double phase = 0.0;      // radians in [0, 2 pi)
};

// z[n] = sum_j A_j cos(2 pi f_j n / fs + phi_j), n = 0..n-1.
Signal sum_of_sines(std::span<const HarmonicComponent> components, std::size_t n, double fs);

// Two-component AM-FM test signal
//   x[n] = cos(2 pi phi1[n]) + R[n] cos(2 pi phi2[n])
//   R[n]    = amp_mean + amp_swing cos(4 pi n / N)
//   phi1[n] = (p1/P) (n + (fm_depth / 2 pi) cos(2 pi n / N))
//   phi2[n] = p2 n / P + chirp / (2 N fs) n^2
// N is the nominal length that sets the modulation periods; the generator
// can produce more samples than N (held-out future samples for benchmarks).
struct AhmParams {
  std::size_t N = 10000;
  std::size_t P = 750;
  std::size_t p1 = 10;
  std::size_t p2 = 23;
  double fs = 7000.0;
  double amp_mean = 1.4;
  double amp_swing = 0.2;
  double fm_depth = 0.01;
  double chirp = 20.0;
};

Signal ahm_signal(const AhmParams& params, std::size_t length);

inline Signal ahm_signal(std::size_t n, std::size_t P, std::size_t p1, std::size_t p2,
                         double fs) {
  AhmParams params;
  params.N = n;
  params.P = P;
  params.p1 = p1;
  params.p2 = p2;
  params.fs = fs;
  return ahm_signal(params, n);
}

// x = z + sigma * w with w ~ N(0, 1) drawn by gaussian_noise(len, 1, seed).
Signal add_noise(const Signal& z, double sigma, std::uint64_t seed);

}  // namespace boundeff
