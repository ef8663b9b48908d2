#include <doctest.h>

#include <cmath>
#include <random>

#include "boundeff/error.hpp"
#include "boundeff/pipeline.hpp"

using namespace boundeff;

namespace {

Signal test_signal(std::size_t n, unsigned seed, double fs = 1.0) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  RealVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    x[i] = std::cos(0.21 * t) + 0.7 * std::cos(0.05 * t + 0.002 * t * t / 100) + 0.05 * nd(gen);
  }
  return Signal(std::move(x), fs);
}

}  // namespace

TEST_CASE("no extension is the plain transform") {
  const Signal x = test_signal(300, 1);
  PipelineConfig cfg;
  cfg.window = WindowSpec::gaussian(16);
  cfg.n_fft = 64;
  cfg.hop = 2;
  const TfrMatrix direct = stft(x, cfg.window, 64, 2);
  const TfrMatrix piped = bound_eff_red(x, cfg);
  CHECK(piped.values == direct.values);
  cfg.extender = SigExtParams{24, 60};
  cfg.L = 0;
  CHECK_THROWS_AS(bound_eff_red(x, cfg), ConfigError);
}

TEST_CASE("output grid and interior columns") {
  const Signal x = test_signal(301, 2);
  for (std::size_t hop : {1u, 3u, 7u}) {
    PipelineConfig cfg;
    cfg.window = WindowSpec::gaussian(16);
    cfg.n_fft = 64;
    cfg.hop = hop;
    cfg.L = 20;
    cfg.extender = SigExtParams{30, 75};
    const TfrMatrix out = bound_eff_red(x, cfg);
    CHECK(out.n_time == (301 + hop - 1) / hop);
    const TfrMatrix plain = stft(x, cfg.window, 64, hop);
    // columns whose window stays inside [0, N) ignore the extension
    for (std::size_t c = 0; c < out.n_time; ++c) {
      if (c * hop + 16 >= 301) break;
      for (std::size_t k = 0; k < out.n_freq; ++k) REQUIRE(out.at(k, c) == plain.at(k, c));
    }
  }
}

TEST_CASE("samples past the observed end never reach the output") {
  // two signals that agree on [0, N) and differ wildly afterwards
  const Signal base = test_signal(400, 6);
  RealVector a(base.vector());
  RealVector b(base.vector());
  for (std::size_t i = 300; i < 400; ++i) {
    a[i] = 1e6;
    b[i] = -1e6;
  }
  PipelineConfig cfg;
  cfg.window = WindowSpec::gaussian(16);
  cfg.n_fft = 64;
  cfg.hop = 3;
  cfg.L = 30;
  for (const ExtenderKind& ext : {ExtenderKind{SigExtParams{40, 100}}, ExtenderKind{SymmetricParams{}},
                                  ExtenderKind{DmdParams{40, 100, 8}}}) {
    CAPTURE(describe(ext));
    cfg.extender = ext;
    const Signal xa(RealVector(a.begin(), a.begin() + 300), 1.0);
    const Signal xb(RealVector(b.begin(), b.begin() + 300), 1.0);
    CHECK(bound_eff_red(xa, cfg).values == bound_eff_red(xb, cfg).values);
  }
}

TEST_CASE("restrict_to") {
  const Signal x = test_signal(100, 3);
  const TfrMatrix t = stft(x, WindowSpec::gaussian(8), 32, 4);
  const TfrMatrix r = restrict_to(t, 50);
  CHECK(r.n_time == 13);
  CHECK(r.time_axis.back() == 48.0);
  CHECK_THROWS_AS(restrict_to(t, 101), ConfigError);
}

TEST_CASE("L below the window half length is rejected") {
  PipelineConfig cfg;
  cfg.window = WindowSpec::gaussian(16);
  cfg.n_fft = 64;
  cfg.extender = SymmetricParams{};
  cfg.L = 15;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.L = 16;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("streaming reproduces the batch transform bit for bit") {
  std::mt19937 gen(77);
  const std::vector<ExtenderKind> extenders{NoExtension{}, SigExtParams{30, 75}, SymmetricParams{},
                                            DmdParams{30, 75, 6}};
  const std::vector<TfrKind> kinds{StftKind{}, SstKind{}, RsKind{}, RsKind{1e-4, true},
                                   ConceftKind{2, 2, 1e-4, 5}};
  const Signal full = test_signal(420, 5);
  int trials = 0;
  for (const auto& ext : extenders) {
    for (const auto& kind : kinds) {
      for (std::size_t hop : {1u, 4u}) {
        for (std::size_t L : {12u, 25u}) {
          CAPTURE(describe(ext));
          CAPTURE(describe(kind));
          CAPTURE(hop);
          CAPTURE(L);
          PipelineConfig cfg;
          cfg.extender = ext;
          cfg.tfr = kind;
          cfg.window = WindowSpec::gaussian(12);
          cfg.n_fft = 32;
          cfg.hop = hop;
          cfg.L = L;
          const std::size_t n0 = 180;
          StreamState st(Signal(RealVector(full.vector().begin(), full.vector().begin() + n0), 1.0), cfg);
          std::size_t pos = n0;
          std::uniform_int_distribution<std::size_t> chunk(1, 37);
          while (pos < full.size()) {
            const std::size_t n = std::min(chunk(gen), full.size() - pos);
            const std::size_t before = st.tfr().n_time;
            const auto deltas = st.push(std::span<const double>(full.samples().data() + pos, n));
            pos += n;
            CHECK(st.buffer_size() <= st.min_history());
            CHECK(!deltas.empty());
            CHECK(deltas.back().index + 1 == st.tfr().n_time);
            CHECK(st.tfr().n_time >= before);
          }
          const Signal seen(RealVector(full.vector().begin(), full.vector().begin() + pos), 1.0);
          const TfrMatrix batch = bound_eff_red(seen, cfg);
          REQUIRE(st.tfr().n_time == batch.n_time);
          REQUIRE(st.tfr().values == batch.values);
          ++trials;
        }
      }
    }
  }
  CHECK(trials == 80);
}

TEST_CASE("stream bookkeeping") {
  PipelineConfig cfg;
  cfg.extender = SigExtParams{30, 75};
  cfg.window = WindowSpec::gaussian(12);
  cfg.n_fft = 32;
  cfg.hop = 2;
  cfg.L = 20;
  const Signal x0 = test_signal(200, 8);
  StreamState st(x0, cfg);
  SUBCASE("no pushes equals batch") {
    CHECK(st.tfr().values == bound_eff_red(x0, cfg).values);
    CHECK(st.buffer_size() == std::min<std::size_t>(200, st.min_history()));
    CHECK(st.samples_seen() == 200);
  }
  SUBCASE("empty push") { CHECK(st.push({}).empty()); }
  SUBCASE("delta count covers the dirty tail") {
    const RealVector one{0.5};
    const auto deltas = st.push(one);
    CHECK(st.samples_seen() == 201);
    CHECK(st.tfr().n_time == 101);
    // columns whose window or extension reached sample 200 change: c*2 + 12 >= 200
    CHECK(deltas.front().index == 94);
    CHECK(deltas.size() == 7);
  }
  SUBCASE("too little initial history") {
    CHECK_THROWS_AS(StreamState(test_signal(50, 1), cfg), ConfigError);
  }
  SUBCASE("memory stays bounded over a long run") {
    const Signal more = test_signal(3000, 9);
    for (std::size_t i = 0; i < more.size(); i += 50) {
      st.push(std::span<const double>(more.samples().data() + i, 50));
      REQUIRE(st.buffer_size() <= st.min_history());
    }
    CHECK(st.samples_seen() == 3200);
  }
}

TEST_CASE("timing budget") {
  SUBCASE("reported hardware figures need a hop of eight") {
    const TimingBudget b = timing_budget(0.046, 0.00208, 250, 8, 65.5);
    CHECK(b.feasible);
    REQUIRE(b.min_hop.has_value());
    CHECK(*b.min_hop == 8);
    CHECK_FALSE(timing_feasible(0.046, 0.00208, 250, 7, 65.5));
  }
  SUBCASE("free computation is feasible at hop one") {
    const TimingBudget b = timing_budget(0.0, 0.0, 250, 1, 65.5);
    CHECK(b.feasible);
    CHECK(*b.min_hop == 1);
  }
  SUBCASE("forecast slower than any budget within the scan") {
    const TimingBudget b = timing_budget(10.0, 0.0, 250, 1, 65.5, 100);
    CHECK_FALSE(b.feasible);
    CHECK_FALSE(b.min_hop.has_value());
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(timing_budget(0.1, 0.1, 10, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(timing_budget(-0.1, 0.1, 10, 1, 1.0), ConfigError);
    CHECK_FALSE(timing_feasible(0.0, 0.0, 10, 0, 1.0));
  }
}
