#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "boundeff/error.hpp"
#include "boundeff/verify.hpp"

using namespace boundeff;

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  }
  return m;
}

struct RandomConfig {
  std::vector<HarmonicComponent> components;
  std::size_t M = 0;
  double sigma = 0.0;
};

RandomConfig random_config(std::mt19937& gen) {
  RandomConfig c;
  c.M = std::uniform_int_distribution<std::size_t>(8, 60)(gen);
  const std::size_t J = std::uniform_int_distribution<std::size_t>(0, 3)(gen);
  std::uniform_int_distribution<std::size_t> pick(1, (c.M - 1) / 2);
  std::set<std::size_t> used;
  while (used.size() < J) used.insert(pick(gen));
  for (std::size_t p : used) {
    const double amp = std::uniform_real_distribution<double>(0.2, 2.0)(gen);
    c.components.push_back({amp, static_cast<double>(p) / static_cast<double>(c.M), 0.0});
  }
  c.sigma = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 0.0)(gen));
  return c;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("closed-form inverse and one-step operator match explicit matrices") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomConfig c = random_config(gen);
    CAPTURE(trial);
    CAPTURE(c.M);
    CAPTURE(c.components.size());
    const Eigen::MatrixXd S0 = to_eigen(explicit_S(c.components, c.sigma, c.M, 0));
    const Eigen::MatrixXd S1 = to_eigen(explicit_S(c.components, c.sigma, c.M, 1));
    const Eigen::MatrixXd inv = to_eigen(closed_form_S0_inv(c.components, c.sigma, c.M));
    const Eigen::MatrixXd A0 = to_eigen(closed_form_A0(c.components, c.sigma, c.M));
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(c.M),
                                                        static_cast<Eigen::Index>(c.M));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S0).eigenvalues();
    const double cond = ev.maxCoeff() / ev.minCoeff();
    CAPTURE(cond);
    CHECK(rel_diff(S0 * inv, I) < 1e-14 * cond);
    const Eigen::MatrixXd A_explicit = S1 * S0.ldlt().solve(I);
    CHECK(rel_diff(A0, A_explicit) < 1e-14 * cond);
    // spectral radius of the companion operator never exceeds one
    const auto eig = A0.eigenvalues();
    CHECK(eig.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("max-norm bounds of the closed forms") {
  std::mt19937 gen(57);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomConfig c = random_config(gen);
    const double J = static_cast<double>(c.components.size());
    const double M = static_cast<double>(c.M);
    const Eigen::MatrixXd inv = to_eigen(closed_form_S0_inv(c.components, c.sigma, c.M));
    const Eigen::MatrixXd A0 = to_eigen(closed_form_A0(c.components, c.sigma, c.M));
    CAPTURE(trial);
    CHECK(inv.cwiseAbs().maxCoeff() <= (1.0 + 2.0 * J / M) / (c.sigma * c.sigma) * (1.0 + 1e-12));
    CHECK(A0.cwiseAbs().maxCoeff() <= std::max(1.0, 2.0 * J / M) * (1.0 + 1e-12));
  }
}

TEST_CASE("closed forms without components and in the noise limits") {
  SUBCASE("J = 0") {
    const std::vector<HarmonicComponent> none;
    const DenseMatrix inv = closed_form_S0_inv(none, 0.5, 6);
    const DenseMatrix A0 = closed_form_A0(none, 0.5, 6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        CHECK(inv(i, j) == (i == j ? 4.0 : 0.0));
        CHECK(A0(i, j) == (j == i + 1 ? 1.0 : 0.0));
      }
    }
  }
  const std::vector<HarmonicComponent> c{{1.0, 3.0 / 40.0, 0.0}};
  SUBCASE("large noise shrinks the forecast row to zero") {
    const DenseMatrix A0 = closed_form_A0(c, 1e4, 40);
    for (std::size_t j = 0; j < 40; ++j) CHECK(std::abs(A0(39, j)) < 1e-8);
  }
  SUBCASE("vanishing noise reproduces the noiseless recurrence") {
    const DenseMatrix A0 = closed_form_A0(c, 1e-8, 40);
    const Signal z = sum_of_sines(c, 41, 1.0);
    double pred = 0.0;
    for (std::size_t j = 0; j < 40; ++j) pred += A0(39, j) * z[j];
    CHECK(std::abs(pred - z[40]) < 1e-8);
  }
  SUBCASE("argument errors") {
    const std::vector<HarmonicComponent> off{{1.0, 0.1234567, 0.0}};
    CHECK_THROWS_AS(closed_form_A0(off, 0.1, 40), ConfigError);
    CHECK_THROWS_AS(closed_form_S0_inv(c, 0.0, 40), ConfigError);
    CHECK_THROWS_AS(closed_form_A0(c, 0.1, 0), ConfigError);
  }
}

TEST_CASE("estimated coefficients approach the closed form as K grows") {
  OracleConfig cfg;
  cfg.signal.components = {{1.0, 4.0 / 30.0, 0.0}, {0.7, 9.0 / 30.0, 0.0}};
  cfg.M = 30;
  cfg.sigma = 0.1;
  cfg.Ks = {300, 1200, 4800};
  cfg.realizations = 20;
  const auto pts = oracle_convergence(cfg);
  REQUIRE(pts.size() == 3);
  CHECK(pts[1].deviation < pts[0].deviation);
  CHECK(pts[2].deviation < pts[1].deviation);
  // deviation ~ K^(-1/2): a 16x larger K shrinks it by about 4
  CHECK(pts[2].deviation < 0.5 * pts[0].deviation);
}

TEST_CASE("two-tone signal: sample n-1 carries index n") {
  const SinesSpec s = two_tone_sines();
  const Signal z = sum_of_sines(s.components, 5, 1.0);
  for (std::size_t i = 0; i < 5; ++i) {
    const double n = static_cast<double>(i + 1);
    const double ref = std::cos(2 * std::numbers::pi * 10 * n / 150) +
                       1.4 * std::cos(2 * std::numbers::pi * 33 * n / 150);
    CHECK(std::abs(z[i] - ref) < 1e-12);
  }
}

TEST_CASE("logspace") {
  const auto v = logspace(1e-3, 1e1, 5);
  CHECK(v.front() == 1e-3);
  CHECK(v[2] == doctest::Approx(0.1));
  CHECK(v.back() == 1e1);
  CHECK(logspace_int(800, 2000, 12).front() == 800);
  CHECK(logspace_int(800, 2000, 12).back() == 2000);
  CHECK_THROWS_AS(logspace(0.0, 1.0, 3), ConfigError);
}

TEST_CASE("monte carlo moments") {
  McConfig cfg;
  cfg.signal = two_tone_sines();
  cfg.M = 30;
  cfg.K = 120;
  cfg.N = 400;
  cfg.realizations = 6;
  cfg.sigmas = {0.0, 1e-3, 1e-2};
  cfg.horizons = {1, 10, 100};
  SUBCASE("noiseless data forecast exactly") {
    cfg.solver = Solver::svd;
    cfg.sigmas = {0.0};
    const McReport r = mc_moments(cfg);
    for (const auto& p : r.points) {
      CAPTURE(p.horizon);
      CHECK(std::abs(p.bias) < 1e-9);
      CHECK(p.variance < 1e-20);
      CHECK(p.failures == 0);
    }
  }
  SUBCASE("deterministic and thread-count independent") {
    McConfig one = cfg;
    one.threads = 1;
    McConfig four = cfg;
    four.threads = 4;
    const McReport a = mc_moments(one);
    const McReport b = mc_moments(four);
    REQUIRE(a.points.size() == 9);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].bias == b.points[i].bias);
      CHECK(a.points[i].variance == b.points[i].variance);
    }
    std::ostringstream csv;
    write_mc_csv(a, csv);
    CHECK(csv.str().rfind("point,sigma,K,horizon,bias,variance,mse,samples,failures\n", 0) == 0);
  }
  SUBCASE("variance grows with sigma") {
    const McReport r = mc_moments(cfg);
    for (std::size_t h = 0; h < 3; ++h) CHECK(r.points[3 + h].variance < r.points[6 + h].variance);
  }
  SUBCASE("validation") {
    cfg.realizations = 1;
    CHECK_THROWS_AS(mc_moments(cfg), ConfigError);
    cfg.realizations = 5;
    cfg.horizons = {0};
    CHECK_THROWS_AS(mc_moments(cfg), ConfigError);
    cfg.horizons = {1};
    cfg.K = 390;
    CHECK_THROWS_AS(mc_moments(cfg), ConfigError);
    cfg.K = 20;
    CHECK_THROWS_AS(mc_moments(cfg), ConfigError);
  }
}

TEST_CASE("fit_slopes on exact power laws") {
  std::vector<McPoint> pts;
  const auto sig = logspace(1e-4, 1e-1, 8);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    McPoint p;
    p.point = i;
    p.sigma = sig[i];
    p.horizon = 1;
    p.variance = 3.0 * sig[i] * sig[i];
    p.samples = 10;
    pts.push_back(p);
  }
  auto s = fit_slopes(SweepKind::sigma, pts);
  REQUIRE(s.size() == 1);
  CHECK(s[0].fit.slope == doctest::Approx(1.0));
  CHECK(s[0].points_used == 6);

  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i].K = 100 * (i + 1);
    pts[i].variance = 5.0 / static_cast<double>(pts[i].K);
  }
  s = fit_slopes(SweepKind::K, pts);
  CHECK(s[0].fit.slope == doctest::Approx(-1.0));
  CHECK(s[0].points_used == 8);
}

TEST_CASE("benchmark table on a short signal") {
  BenchConfig cfg;
  cfg.ahm.N = 1200;
  cfg.L = 60;
  cfg.realizations = 3;
  cfg.window_half = 60;
  cfg.n_fft = 256;
  cfg.hop = 5;
  const std::vector<BenchMethod> methods{{"sigext", SigExtParams{90, 225, Solver::normal_equations}},
                                         {"symmetric", SymmetricParams{}},
                                         {"dmd", DmdParams{90, 225, 8}}};
  const auto rows = bench_extensions(cfg, methods);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CAPTURE(r.method);
    CHECK(r.realizations == 3);
    CHECK(r.mse_mean > 0.0);
    CHECK(std::isfinite(r.D_mean));
    CHECK(r.D_mean >= 0.0);
  }
  CHECK(rows[0].mse_mean < rows[1].mse_mean);
  CHECK(rows[0].D_mean < rows[1].D_mean);
  const auto again = bench_extensions(cfg, methods);
  CHECK(again[0].mse_mean == rows[0].mse_mean);
  std::ostringstream csv;
  write_bench_csv(rows, csv);
  CHECK(csv.str().rfind("method,", 0) == 0);
  CHECK(benchmark_methods().size() == 5);
}
