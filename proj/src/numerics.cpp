#include "boundeff/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "boundeff/error.hpp"

namespace boundeff {

namespace {

using EigenRowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const EigenRowMatrix> as_eigen(const DenseMatrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ConfigError("DenseMatrix: entry count does not match rows*cols");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw ConfigError("DenseMatrix product: dimension mismatch");
  DenseMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      if (a == 0.0) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

RealVector DenseMatrix::operator*(std::span<const double> v) const {
  if (cols_ != v.size()) throw ConfigError("DenseMatrix-vector product: dimension mismatch");
  RealVector out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError("max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + ": non-finite entry");
  }
}

// ---------------------------------------------------------------------------
// FFT

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw ConfigError("dft: empty input");
  const bool is_pow2 = (n & (n - 1)) == 0;
  pow2_ = is_pow2 ? n : next_pow2(2 * n - 1);

  bitrev_.resize(pow2_);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < pow2_) ++bits;
  for (std::size_t i = 0; i < pow2_; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(pow2_ / 2);
  for (std::size_t k = 0; k < pow2_ / 2; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(pow2_);
    twiddle_[k] = {std::cos(ang), std::sin(ang)};
  }

  if (is_pow2) return;

  // k^2 is reduced modulo 2n before scaling so the chirp phase stays exact for
  // long transforms.
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp_[k] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<Complex> filter(pow2_, Complex{});
  filter[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    filter[k] = std::conj(chirp_[k]);
    filter[pow2_ - k] = std::conj(chirp_[k]);
  }
  radix2(filter, false);
  chirp_fft_ = std::move(filter);
}

void FftPlan::radix2(std::span<Complex> data, bool inverse) const {
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddle_[k * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

void FftPlan::bluestein(std::span<Complex> data, bool inverse) const {
  std::vector<Complex> work(pow2_, Complex{});
  for (std::size_t k = 0; k < n_; ++k) {
    const Complex x = inverse ? std::conj(data[k]) : data[k];
    work[k] = x * chirp_[k];
  }
  radix2(work, false);
  for (std::size_t k = 0; k < pow2_; ++k) work[k] *= chirp_fft_[k];
  radix2(work, true);
  const double scale = 1.0 / static_cast<double>(pow2_);
  for (std::size_t k = 0; k < n_; ++k) {
    const Complex y = work[k] * scale * chirp_[k];
    data[k] = inverse ? std::conj(y) : y;
  }
}

void FftPlan::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw ConfigError("FftPlan: length mismatch");
  if (pow2_ == n_) {
    radix2(data, false);
  } else {
    bluestein(data, false);
  }
}

void FftPlan::inverse(std::span<Complex> data) const {
  if (data.size() != n_) throw ConfigError("FftPlan: length mismatch");
  if (pow2_ == n_) {
    radix2(data, true);
  } else {
    bluestein(data, true);
  }
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

ComplexVector dft(std::span<const Complex> x, bool inverse) {
  if (x.empty()) throw ConfigError("dft: empty input");
  FftPlan plan(x.size());
  ComplexVector out(x.begin(), x.end());
  if (inverse) {
    plan.inverse(out);
  } else {
    plan.forward(out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

SpdSolution solve_spd_detailed(const DenseMatrix& a, std::span<const double> b,
                               const JitterPolicy& policy) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ConfigError("solve_spd: matrix is not square");
  if (b.size() != n) throw ConfigError("solve_spd: right-hand side length mismatch");
  if (n == 0) return {};
  require_finite(a.data(), "solve_spd");
  require_finite(b, "solve_spd");

  const double scale = a.max_abs();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale) {
        throw ConfigError("solve_spd: matrix is not symmetric");
      }
    }
  }

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
  const double mean_diag = trace / static_cast<double>(n);
  if (!(mean_diag > 0.0)) throw NumericError("solve_spd: matrix has nonpositive trace");

  const auto a_map = as_eigen(a);
  const Eigen::Map<const Eigen::VectorXd> b_map(b.data(), static_cast<Eigen::Index>(n));
  const double pivot_floor = policy.pivot_floor_rel * mean_diag;

  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd work = a_map;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    bool ok = llt.info() == Eigen::Success;
    double dmin = 0.0;
    double dmax = 0.0;
    if (ok) {
      const auto diag = llt.matrixLLT().diagonal();
      dmin = diag.minCoeff();
      dmax = diag.maxCoeff();
      ok = std::isfinite(dmin) && dmin * dmin > pivot_floor;
    }
    if (ok) {
      Eigen::VectorXd sol = llt.solve(b_map);
      SpdSolution out;
      out.x.assign(sol.data(), sol.data() + n);
      out.jitter = jitter;
      out.condition = (dmax / dmin) * (dmax / dmin);
      return out;
    }
    jitter = jitter == 0.0 ? policy.initial_rel * mean_diag : jitter * policy.factor;
    if (jitter > policy.max_rel * mean_diag * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "solve_spd: factorization failed after diagonal loading up to "
          << policy.max_rel << " * trace/dim";
      throw NumericError(msg.str());
    }
  }
}

PinvSolution pinv_apply_detailed(const DenseMatrix& x, std::span<const double> v, double rtol) {
  if (v.size() != x.rows()) throw ConfigError("pinv_apply: vector length must equal matrix rows");
  if (!(rtol >= 0.0)) throw ConfigError("pinv_apply: rtol must be nonnegative");
  require_finite(x.data(), "pinv_apply");
  require_finite(v, "pinv_apply");
  PinvSolution out;
  out.x.assign(x.cols(), 0.0);
  if (x.rows() == 0 || x.cols() == 0) return out;

  const Eigen::MatrixXd m = as_eigen(x);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax == 0.0) return out;

  const Eigen::Map<const Eigen::VectorXd> v_map(v.data(), static_cast<Eigen::Index>(v.size()));
  Eigen::VectorXd coeff = svd.matrixU().transpose() * v_map;
  double smin = smax;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rtol * smax) {
      coeff(i) /= s(i);
      smin = std::min(smin, s(i));
      ++out.rank;
    } else {
      coeff(i) = 0.0;
    }
  }
  const Eigen::VectorXd sol = svd.matrixV() * coeff;
  out.x.assign(sol.data(), sol.data() + sol.size());
  out.condition = smax / smin;
  return out;
}

// ---------------------------------------------------------------------------
// Random numbers

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(splitmix(base) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

RealVector gaussian_noise(std::size_t n, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian_noise: sigma must be a finite nonnegative number");
  }
  RealVector out(n, 0.0);
  if (sigma == 0.0) return out;
  std::mt19937_64 gen(seed);
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  auto uniform = [&] { return (static_cast<double>(gen() >> 11) + 0.5) * kScale; };
  for (std::size_t i = 0; i < n; i += 2) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[i] = sigma * r * std::cos(theta);
    if (i + 1 < n) out[i + 1] = sigma * r * std::sin(theta);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

LineFit loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ConfigError("loglog_slope: length mismatch");
  if (xs.size() < 2) throw ConfigError("loglog_slope: need at least two points");
  const std::size_t n = xs.size();
  RealVector lx(n);
  RealVector ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw ConfigError("loglog_slope: entries must be finite and positive");
    }
    lx[i] = std::log10(xs[i]);
    ly[i] = std::log10(ys[i]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("loglog_slope: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    correction_ += (sum_ - t) + v;
  } else {
    correction_ += (v - t) + sum_;
  }
  sum_ = t;
}

}  // namespace boundeff
