#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace boundeff {

using Complex = std::complex<double>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  DenseMatrix transposed() const;
  DenseMatrix operator*(const DenseMatrix& rhs) const;
  RealVector operator*(std::span<const double> v) const;

  // max |a_ij|
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Throws ConfigError naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

// ---------------------------------------------------------------------------
// Fourier transform

// Precomputed plan for a length-n complex DFT. Powers of two use an iterative
// radix-2 kernel; every other length goes through Bluestein's chirp-z
// algorithm on a power-of-two grid. Plans are immutable after construction and
// can be shared between threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  // In place; `data.size()` must equal size(). The inverse is scaled by 1/n.
  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

 private:
  void radix2(std::span<Complex> data, bool inverse) const;
  void bluestein(std::span<Complex> data, bool inverse) const;

  std::size_t n_;
  std::size_t pow2_;  // transform length of the radix-2 kernel
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;  // exp(-2 pi i k / pow2_), k < pow2_/2
  std::vector<Complex> chirp_;    // exp(-pi i k^2 / n), k < n
  std::vector<Complex> chirp_fft_;  // FFT of the conjugate chirp filter
};

// X[k] = sum_n x[n] exp(-2 pi i n k / N); the inverse divides by N.
ComplexVector dft(std::span<const Complex> x, bool inverse = false);

// ---------------------------------------------------------------------------
// Dense solvers

// Diagonal loading ladder used when a Cholesky factorization fails:
// lambda starts at initial_rel * trace/dim and grows by `factor` until it
// exceeds max_rel * trace/dim.
struct JitterPolicy {
  double initial_rel = 1e-10;
  double max_rel = 1e-4;
  double factor = 10.0;
  // A pivot below pivot_floor_rel * trace/dim counts as a failed factorization.
  double pivot_floor_rel = 1e-13;
};

struct SpdSolution {
  RealVector x;
  double jitter = 0.0;     // diagonal loading actually applied
  double condition = 1.0;  // (max L_ii / min L_ii)^2 of the Cholesky factor
};

SpdSolution solve_spd_detailed(const DenseMatrix& a, std::span<const double> b,
                               const JitterPolicy& policy = {});

inline RealVector solve_spd(const DenseMatrix& a, std::span<const double> b,
                            const JitterPolicy& policy = {}) {
  return solve_spd_detailed(a, b, policy).x;
}

struct PinvSolution {
  RealVector x;
  double condition = 1.0;  // sigma_max / sigma_min over the retained values
  std::size_t rank = 0;
};

// Minimal-norm least-squares solution X^+ v via a thin SVD; singular values
// below rtol * sigma_max are treated as zero.
PinvSolution pinv_apply_detailed(const DenseMatrix& x, std::span<const double> v,
                                 double rtol = 1e-10);

inline RealVector pinv_apply(const DenseMatrix& x, std::span<const double> v,
                             double rtol = 1e-10) {
  return pinv_apply_detailed(x, v, rtol).x;
}

// ---------------------------------------------------------------------------
// Random numbers

// SplitMix64 finalizer; used to derive independent stream seeds from a base
// seed and integer indices.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

// i.i.d. N(0, sigma^2) samples. The generator is std::mt19937_64 seeded with
// `seed`; each pair of 64-bit draws u1, u2 is mapped to (0,1) with 53-bit
// resolution and converted by the Box-Muller transform into the pair
// r cos(theta), r sin(theta). Identical seeds give identical vectors.
RealVector gaussian_noise(std::size_t n, double sigma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Statistics

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least-squares fit of log10(ys) against log10(xs).
LineFit loglog_slope(std::span<const double> xs, std::span<const double> ys);

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

}  // namespace boundeff
