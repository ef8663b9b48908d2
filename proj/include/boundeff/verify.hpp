#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "boundeff/extend.hpp"
#include "boundeff/numerics.hpp"
#include "boundeff/signal.hpp"

namespace boundeff {

// Sum of sines sampled at fs = 1; component frequencies are cycles/sample.
struct SinesSpec {
  std::vector<HarmonicComponent> components;
};

using McSignal = std::variant<SinesSpec, AhmParams>;

enum class SweepKind { sigma, K };

struct McConfig {
  McSignal signal = SinesSpec{};
  std::size_t M = 150;
  std::size_t K = 450;
  std::size_t N = 10000;
  Solver solver = Solver::normal_equations;
  SweepKind sweep = SweepKind::sigma;
  std::vector<double> sigmas;       // sigma sweep
  std::vector<std::size_t> Ks;      // K sweep
  double sigma = 1e-2;              // fixed noise level of a K sweep
  std::vector<std::size_t> horizons{1, 10, 100};
  std::size_t realizations = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const;
  std::size_t sweep_size() const;
};

// Noiseless two-tone signal of the variance-scaling experiments:
// cos(2 pi p1 n / M) + A cos(2 pi p2 n / M) for n = 1..N.
SinesSpec two_tone_sines(std::size_t M = 150, std::size_t p1 = 10, std::size_t p2 = 33,
                        double A = 1.4);

std::vector<double> logspace(double lo, double hi, std::size_t count);
std::vector<std::size_t> logspace_int(std::size_t lo, std::size_t hi, std::size_t count);

struct McPoint {
  std::size_t point = 0;
  double sigma = 0.0;
  std::size_t K = 0;
  std::size_t horizon = 0;
  double bias = 0.0;      // mean of x~[N-1+l] - z[N-1+l]
  double variance = 0.0;  // unbiased sample variance
  double mse = 0.0;       // mean squared error
  std::size_t samples = 0;
  std::size_t failures = 0;
};

struct McSlope {
  std::size_t horizon = 0;
  LineFit fit;
  std::size_t points_used = 0;
};

struct McReport {
  SweepKind sweep = SweepKind::sigma;
  std::vector<McPoint> points;  // sweep-point major, horizon minor
  std::vector<McSlope> slopes;  // one per horizon
};

// Each realization r draws its noise from gaussian_noise(N, 1, mix_seed(seed, r)),
// shared across sweep points so that the sweep compares like with like.
McReport mc_moments(const McConfig& cfg);

// Variance against sigma^2 (slope 1 expected) or against K (slope -1). The
// sigma fit drops points whose variance is below 10x the smallest observed
// one at that horizon.
std::vector<McSlope> fit_slopes(SweepKind sweep, std::span<const McPoint> points);

void write_mc_csv(const McReport& report, std::ostream& out);

// ---------------------------------------------------------------------------
// Closed-form oracles for sums of sines with f_j = p_j fs / M.

// S(a)[m,m'] = sigma^2 delta(m+a, m') + sum_j (Omega_j^2 / 2) cos(2 pi p_j (m+a-m') / M)
DenseMatrix explicit_S(std::span<const HarmonicComponent> components, double sigma,
                       std::size_t M, int a, double fs = 1.0);

DenseMatrix closed_form_S0_inv(std::span<const HarmonicComponent> components, double sigma,
                               std::size_t M, double fs = 1.0);

DenseMatrix closed_form_A0(std::span<const HarmonicComponent> components, double sigma,
                           std::size_t M, double fs = 1.0);

struct OracleConfig {
  SinesSpec signal;
  std::size_t M = 50;
  double sigma = 1e-2;
  std::vector<std::size_t> Ks{500, 1000, 2000, 4000};
  std::size_t realizations = 50;
  std::uint64_t seed = 1;
};

struct OraclePoint {
  std::size_t K = 0;
  double deviation = 0.0;  // mean over realizations of max |alpha - A0 last row|
};

std::vector<OraclePoint> oracle_convergence(const OracleConfig& cfg);

// ---------------------------------------------------------------------------
// Extension benchmark on the noisy AHM signal.

struct BenchMethod {
  std::string name;
  ExtenderKind extender;
};

// SigExt with M in {100, 750, 1500} and K = 2.5 M, symmetric, and DMD
// (M = 750, K = 2.5 M, rank 20).
std::vector<BenchMethod> benchmark_methods();

struct BenchConfig {
  AhmParams ahm;  // ahm.N observed samples
  double sigma = 1e-2;
  std::size_t L = 700;
  std::size_t realizations = 50;
  std::uint64_t seed = 1;
  // STFT used by the performance index.
  std::size_t window_half = 700;
  std::size_t n_fft = 2048;
  std::size_t hop = 10;
  bool compute_D = true;
};

struct BenchRow {
  std::string method;
  double mse_mean = 0.0;
  double mse_sd = 0.0;
  double D_mean = 0.0;
  double D_sd = 0.0;
  double seconds = 0.0;  // mean wall-clock per extension
  std::size_t realizations = 0;
  std::size_t diverged = 0;
  std::size_t failures = 0;
};

// Realization r observes x = z + sigma w on the first ahm.N samples, with
// w = gaussian_noise(N + L, 1, mix_seed(seed, r)); the remaining L samples
// of the same draw are the held-out truth for the MSE and for F_opt.
std::vector<BenchRow> bench_extensions(const BenchConfig& cfg, std::span<const BenchMethod> methods);

void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out);

}  // namespace boundeff
