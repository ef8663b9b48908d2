#include "boundeff/signal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "boundeff/error.hpp"

namespace boundeff {

Signal::Signal(RealVector samples, double fs) : samples_(std::move(samples)), fs_(fs) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw ConfigError("Signal: sampling rate must be positive");
  require_finite(samples_, "Signal");
}

Signal sum_of_sines(std::span<const HarmonicComponent> components, std::size_t n, double fs) {
  if (!(fs > 0.0)) throw ConfigError("sum_of_sines: sampling rate must be positive");
  for (const auto& c : components) {
    if (!(c.amplitude > 0.0)) throw ConfigError("sum_of_sines: amplitudes must be positive");
    if (!(c.frequency >= 0.0) || !(c.frequency < fs / 2.0)) {
      std::ostringstream msg;
      msg << "sum_of_sines: frequency " << c.frequency << " Hz is aliased at fs=" << fs;
      throw ConfigError(msg.str());
    }
  }
  RealVector z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& c : components) {
      acc += c.amplitude *
             std::cos(2.0 * std::numbers::pi * c.frequency * static_cast<double>(i) / fs + c.phase);
    }
    z[i] = acc;
  }
  return Signal(std::move(z), fs);
}

Signal ahm_signal(const AhmParams& p, std::size_t length) {
  if (p.N == 0 || p.P == 0 || p.p1 == 0 || p.p2 == 0) {
    throw ConfigError("ahm_signal: N, P, p1 and p2 must be positive");
  }
  if (!(p.fs > 0.0)) throw ConfigError("ahm_signal: sampling rate must be positive");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double big_n = static_cast<double>(p.N);
  const double period = static_cast<double>(p.P);
  RealVector x(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double n = static_cast<double>(i);
    const double amp = p.amp_mean + p.amp_swing * std::cos(2.0 * kTwoPi * n / big_n);
    const double phi1 =
        static_cast<double>(p.p1) / period * (n + p.fm_depth / kTwoPi * std::cos(kTwoPi * n / big_n));
    const double phi2 =
        static_cast<double>(p.p2) * n / period + p.chirp / (2.0 * big_n * p.fs) * n * n;
    x[i] = std::cos(kTwoPi * phi1) + amp * std::cos(kTwoPi * phi2);
  }
  return Signal(std::move(x), p.fs);
}

Signal add_noise(const Signal& z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("add_noise: sigma must be nonnegative");
  if (sigma == 0.0) return z;
  const RealVector w = gaussian_noise(z.size(), 1.0, seed);
  RealVector x(z.vector());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += sigma * w[i];
  return Signal(std::move(x), z.fs());
}

}  // namespace boundeff
