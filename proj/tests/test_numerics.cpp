#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "boundeff/error.hpp"
#include "boundeff/numerics.hpp"

using namespace boundeff;

namespace {

ComplexVector naive_dft(const ComplexVector& x) {
  const std::size_t n = x.size();
  ComplexVector out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{};
    for (std::size_t j = 0; j < n; ++j) {
      const double arg = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * Complex(std::cos(arg), std::sin(arg));
    }
    out[k] = acc;
  }
  return out;
}

ComplexVector random_complex(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexVector x(n);
  for (auto& v : x) v = {u(gen), u(gen)};
  return x;
}

double max_err(const ComplexVector& a, const ComplexVector& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST_CASE("dft of an impulse is flat and of a constant is a single bin") {
  const ComplexVector impulse{1, 0, 0, 0};
  for (const auto& v : dft(impulse)) CHECK(std::abs(v - Complex(1, 0)) < 1e-15);
  const ComplexVector ones{1, 1, 1, 1};
  const auto d = dft(ones);
  CHECK(std::abs(d[0] - Complex(4, 0)) < 1e-15);
  for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(d[k]) < 1e-15);
}

TEST_CASE("fft matches the direct sum for power-of-two and Bluestein lengths") {
  for (std::size_t n : {1u, 2u, 3u, 8u, 12u, 17u, 64u, 97u, 100u}) {
    CAPTURE(n);
    const auto x = random_complex(n, 7 + static_cast<unsigned>(n));
    CHECK(max_err(dft(x), naive_dft(x)) < 1e-11 * static_cast<double>(n));
  }
}

TEST_CASE("dft round trip") {
  for (std::size_t n : {17u, 256u, 1000u, 4095u, 4096u}) {
    CAPTURE(n);
    const auto x = random_complex(n, static_cast<unsigned>(n));
    const auto back = dft(dft(x), true);
    double norm = 0.0;
    for (const auto& v : x) norm = std::max(norm, std::abs(v));
    CHECK(max_err(back, x) <= 1e-12 * norm);
  }
}

TEST_CASE("FftPlan rejects a buffer of the wrong length") {
  FftPlan plan(8);
  ComplexVector x(7);
  CHECK_THROWS_AS(plan.forward(x), ConfigError);
}

TEST_CASE("solve_spd small systems") {
  SUBCASE("identity") {
    const auto x = solve_spd(DenseMatrix::identity(3), std::vector<double>{1, 2, 3});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(x[2] == doctest::Approx(3.0));
  }
  SUBCASE("hand elimination") {
    const DenseMatrix a(2, 2, {14, 20, 20, 29});
    const auto x = solve_spd(a, std::vector<double>{26, 38});
    CHECK(x[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("near-singular system succeeds through diagonal loading") {
    const DenseMatrix a(2, 2, {1, 0, 0, 1e-20});
    const SpdSolution s = solve_spd_detailed(a, std::vector<double>{1, 1});
    CHECK(s.jitter > 0.0);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    // residual of the regularized system
    CHECK(std::abs((1.0 + s.jitter) * s.x[0] - 1.0) < 1e-12);
    CHECK(std::abs((1e-20 + s.jitter) * s.x[1] - 1.0) < 1e-9);
  }
  SUBCASE("asymmetric input is rejected") {
    const DenseMatrix a(2, 2, {1, 2, 0, 1});
    CHECK_THROWS_AS(solve_spd(a, std::vector<double>{1, 1}), ConfigError);
  }
  SUBCASE("negative definite input fails") {
    const DenseMatrix a(2, 2, {-1, 0, 0, -1});
    CHECK_THROWS_AS(solve_spd(a, std::vector<double>{1, 1}), NumericError);
  }
}

TEST_CASE("pinv_apply") {
  SUBCASE("identity") {
    const auto x = pinv_apply(DenseMatrix::identity(2), std::vector<double>{3, 4});
    CHECK(x[0] == doctest::Approx(3.0));
    CHECK(x[1] == doctest::Approx(4.0));
  }
  SUBCASE("rank one gives the minimal-norm solution") {
    const PinvSolution s = pinv_apply_detailed(DenseMatrix(2, 2, {1, 2, 2, 4}), std::vector<double>{1, 2});
    CHECK(s.rank == 1);
    CHECK(s.x[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.x[1] == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("full row rank agrees with the normal-equations path") {
    std::mt19937 gen(3);
    std::normal_distribution<double> nd;
    DenseMatrix x(4, 8);
    for (double& v : x.data()) v = nd(gen);
    const std::vector<double> v{0.5, -1.0, 2.0, 0.25};
    const auto a = pinv_apply(x, v);
    const auto y = solve_spd(x * x.transposed(), v);
    const auto b = x.transposed() * std::span<const double>(y);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
  }
}

TEST_CASE("gaussian_noise") {
  SUBCASE("sigma zero") {
    for (double v : gaussian_noise(100, 0.0, 5)) CHECK(v == 0.0);
  }
  SUBCASE("unit variance over a million draws") {
    const auto w = gaussian_noise(1000000, 1.0, 1);
    CompensatedSum s;
    CompensatedSum s2;
    for (double v : w) {
      s.add(v);
      s2.add(v * v);
    }
    const double n = static_cast<double>(w.size());
    const double mean = s.value() / n;
    const double var = (s2.value() - n * mean * mean) / (n - 1.0);
    CHECK(var >= 0.99);
    CHECK(var <= 1.01);
    CHECK(std::abs(mean) < 5e-3);
  }
  SUBCASE("deterministic") {
    CHECK(gaussian_noise(1001, 0.3, 42) == gaussian_noise(1001, 0.3, 42));
    CHECK(gaussian_noise(10, 1.0, 42) != gaussian_noise(10, 1.0, 43));
  }
  SUBCASE("odd lengths are a prefix of the next even length") {
    const auto a = gaussian_noise(7, 1.0, 9);
    const auto b = gaussian_noise(8, 1.0, 9);
    for (std::size_t i = 0; i < 7; ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("mix_seed separates indices") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
}

TEST_CASE("loglog_slope") {
  SUBCASE("identity line") {
    const std::vector<double> xs{1, 2, 5, 10, 100};
    const LineFit f = loglog_slope(xs, xs);
    CHECK(f.slope == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
  }
  SUBCASE("inverse power law") {
    std::vector<double> xs{1, 3, 10, 30, 100};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(5.0 / x);
    const LineFit f = loglog_slope(xs, ys);
    CHECK(f.slope == doctest::Approx(-1.0));
    CHECK(f.intercept == doctest::Approx(std::log10(5.0)));
  }
  SUBCASE("noisy power law") {
    std::mt19937 gen(11);
    std::normal_distribution<double> nd(0.0, 0.01);
    std::vector<double> xs;
    std::vector<double> ys;
    for (int i = 0; i < 40; ++i) {
      const double x = std::pow(10.0, -3.0 + 0.1 * i);
      xs.push_back(x);
      ys.push_back(2.0 * std::pow(x, 1.7) * (1.0 + nd(gen)));
    }
    CHECK(std::abs(loglog_slope(xs, ys).slope - 1.7) < 0.05);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}), ConfigError);
    CHECK_THROWS_AS(loglog_slope(std::vector<double>{1, 2}, std::vector<double>{1, -1}), ConfigError);
  }
}

TEST_CASE("compensated summation keeps small addends") {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);
}

TEST_CASE("DenseMatrix products") {
  const DenseMatrix a(2, 3, {1, 2, 3, 4, 5, 6});
  const DenseMatrix p = a * a.transposed();
  CHECK(p(0, 0) == 14.0);
  CHECK(p(0, 1) == 32.0);
  CHECK(p(1, 1) == 77.0);
  const auto v = a * std::vector<double>{1, 0, -1};
  CHECK(v[0] == -2.0);
  CHECK(v[1] == -2.0);
  CHECK_THROWS_AS(a * a, ConfigError);
}
