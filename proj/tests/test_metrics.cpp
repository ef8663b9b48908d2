#include <doctest.h>

#include <cmath>
#include <random>

#include "boundeff/error.hpp"
#include "boundeff/metrics.hpp"

using namespace boundeff;

namespace {

SpectralPdf random_pdf(std::mt19937& gen, std::size_t n, double bin_width) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution sparse(0.3);
  SpectralPdf p;
  p.bin_width = bin_width;
  p.prob.resize(n);
  double s = 0.0;
  for (double& v : p.prob) {
    v = sparse(gen) ? 0.0 : u(gen);
    s += v;
  }
  if (s == 0.0) {
    p.prob[0] = 1.0;
    s = 1.0;
  }
  for (double& v : p.prob) v /= s;
  return p;
}

SpectralPdf point_mass(std::size_t n, std::size_t at, double bin_width = 1.0) {
  SpectralPdf p;
  p.bin_width = bin_width;
  p.prob.assign(n, 0.0);
  p.prob[at] = 1.0;
  return p;
}

TfrMatrix random_tfr(std::mt19937& gen, std::size_t n_time) {
  std::normal_distribution<double> nd;
  TfrMatrix m = make_tfr(TfrGrid{32, 2, 8.0}, n_time, false);
  for (auto& v : m.values) v = {nd(gen), nd(gen)};
  return m;
}

}  // namespace

TEST_CASE("mse_xp") {
  const std::vector<double> f{1, 2, 3};
  const std::vector<double> t{1, 0, 6};
  CHECK(mse_xp(f, t) == doctest::Approx(13.0 / 3.0));
  CHECK(mse_xp(f, f) == 0.0);
  CHECK_THROWS_AS(mse_xp(f, std::vector<double>{1, 2}), ConfigError);
  CHECK_THROWS_AS(mse_xp(std::vector<double>{}, std::vector<double>{}), ConfigError);
}

TEST_CASE("ot distance on point masses is the bin distance") {
  CHECK(ot_distance(point_mass(8, 1), point_mass(8, 4)) == doctest::Approx(3.0));
  CHECK(ot_distance(point_mass(8, 1, 0.5), point_mass(8, 4, 0.5)) == doctest::Approx(1.5));
  // half the mass moved two bins
  SpectralPdf split = point_mass(8, 1);
  split.prob[1] = 0.5;
  split.prob[3] = 0.5;
  CHECK(ot_distance(point_mass(8, 1), split) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ot_distance(point_mass(8, 1), point_mass(9, 1)), ConfigError);
  CHECK_THROWS_AS(ot_distance(point_mass(8, 1, 1.0), point_mass(8, 1, 2.0)), ConfigError);
}

TEST_CASE("ot distance is a metric on random pdfs") {
  std::mt19937 gen(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 60;
    const SpectralPdf p = random_pdf(gen, n, 0.25);
    const SpectralPdf q = random_pdf(gen, n, 0.25);
    const SpectralPdf r = random_pdf(gen, n, 0.25);
    const double pq = ot_distance(p, q);
    REQUIRE(pq >= 0.0);
    REQUIRE(ot_distance(p, p) == 0.0);
    REQUIRE(pq == doctest::Approx(ot_distance(q, p)).epsilon(1e-14));
    REQUIRE(ot_distance(p, r) <= pq + ot_distance(q, r) + 1e-12);
  }
}

TEST_CASE("column_pdf") {
  TfrMatrix m = make_tfr(TfrGrid{8, 1, 16.0}, 2, false);
  m.values[0] = {3, 0};
  m.values[1] = {0, 4};
  const SpectralPdf p = column_pdf(m, 0);
  CHECK(p.bin_width == 2.0);
  CHECK_FALSE(p.degenerate);
  CHECK(p.prob[0] == doctest::Approx(9.0 / 25.0));
  CHECK(p.prob[1] == doctest::Approx(16.0 / 25.0));
  const SpectralPdf z = column_pdf(m, 1);
  CHECK(z.degenerate);
  for (double v : z.prob) CHECK(v == 0.0);
  CHECK_THROWS_AS(column_pdf(m, 2), ConfigError);
}

TEST_CASE("performance index") {
  std::mt19937 gen(8);
  const TfrMatrix f_opt = random_tfr(gen, 20);
  const TfrMatrix f = random_tfr(gen, 20);
  SUBCASE("anchors") {
    CHECK(perf_index_D(f, f, f_opt) == doctest::Approx(1.0));
    CHECK(perf_index_D(f_opt, f, f_opt) == 0.0);
  }
  SUBCASE("invariant to rescaling any representation") {
    TfrMatrix q = random_tfr(gen, 20);
    const double d = perf_index_D(q, f, f_opt);
    TfrMatrix q2 = q;
    for (auto& v : q2.values) v *= 37.0;
    TfrMatrix f2 = f;
    for (auto& v : f2.values) v *= 1e-3;
    CHECK(perf_index_D(q2, f2, f_opt) == doctest::Approx(d).epsilon(1e-12));
  }
  SUBCASE("degenerate reference columns are skipped") {
    TfrMatrix ref = f_opt;
    for (std::size_t k = 0; k < ref.n_freq; ++k) ref.values[3 * ref.n_freq + k] = {};
    const auto d = column_ot_distances(f, ref);
    CHECK(d[3] < 0.0);
    CHECK(d[4] >= 0.0);
    CHECK(std::isfinite(perf_index_D(f, f, ref)));
  }
  SUBCASE("nothing to reduce") { CHECK_THROWS_AS(perf_index_D(f, f_opt, f_opt), NumericError); }
  SUBCASE("shape mismatch") {
    const TfrMatrix other = random_tfr(gen, 19);
    CHECK_THROWS_AS(perf_index_D(other, f, f_opt), ConfigError);
  }
}
