#include "boundeff/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "boundeff/error.hpp"
#include "boundeff/metrics.hpp"
#include "boundeff/pipeline.hpp"

namespace boundeff {

namespace {

std::size_t max_horizon(const McConfig& cfg) {
  return *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
}

Signal clean_signal(const McSignal& spec, std::size_t length) {
  if (const auto* sines = std::get_if<SinesSpec>(&spec)) {
    return sum_of_sines(sines->components, length, 1.0);
  }
  return ahm_signal(std::get<AhmParams>(spec), length);
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t commensurate_index(const HarmonicComponent& c, std::size_t M, double fs) {
  const double p = c.frequency * static_cast<double>(M) / fs;
  const double rounded = std::round(p);
  if (std::abs(p - rounded) > 1e-9 * std::max(1.0, p) || rounded < 0.0) {
    std::ostringstream msg;
    msg << "closed form: frequency " << c.frequency << " is not a multiple of fs/M";
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(rounded);
}

void check_oracle_args(double sigma, std::size_t M) {
  if (M == 0) throw ConfigError("closed form: M must be positive");
  if (!(sigma > 0.0)) throw ConfigError("closed form: sigma must be positive");
}

// 1 / (1 + 4 sigma^2 / (M Omega^2))
double shrink(double sigma, std::size_t M, double omega) {
  return 1.0 / (1.0 + 4.0 * sigma * sigma / (static_cast<double>(M) * omega * omega));
}

}  // namespace

void McConfig::validate() const {
  if (realizations < 2) throw ConfigError("mc: at least two realizations are needed");
  if (horizons.empty()) throw ConfigError("mc: horizon list is empty");
  if (std::find(horizons.begin(), horizons.end(), 0u) != horizons.end()) {
    throw ConfigError("mc: horizons start at 1");
  }
  if (sweep == SweepKind::sigma) {
    if (sigmas.empty()) throw ConfigError("mc: sigma sweep is empty");
    for (double s : sigmas) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("mc: sigma must be finite and >= 0");
    }
    if (K + M > N) throw ConfigError("mc: K + M exceeds N");
  } else {
    if (Ks.empty()) throw ConfigError("mc: K sweep is empty");
    for (std::size_t k : Ks) {
      if (k + M > N) throw ConfigError("mc: K + M exceeds N in the K sweep");
    }
  }
  const std::size_t smallest_K =
      sweep == SweepKind::sigma ? K : *std::min_element(Ks.begin(), Ks.end());
  if (M == 0 || M >= smallest_K) throw ConfigError("mc: require 0 < M < K");
}

std::size_t McConfig::sweep_size() const {
  return sweep == SweepKind::sigma ? sigmas.size() : Ks.size();
}

SinesSpec two_tone_sines(std::size_t M, std::size_t p1, std::size_t p2, double A) {
  // Index n = 1..N of the model maps to sample n-1, hence the phase offset.
  const double m = static_cast<double>(M);
  auto phase = [m](std::size_t p) {
    return std::fmod(2.0 * std::numbers::pi * static_cast<double>(p) / m, 2.0 * std::numbers::pi);
  };
  SinesSpec spec;
  spec.components.push_back({1.0, static_cast<double>(p1) / m, phase(p1)});
  spec.components.push_back({A, static_cast<double>(p2) / m, phase(p2)});
  return spec;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > 0.0) || count == 0) throw ConfigError("logspace: bad range");
  std::vector<double> out(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = std::pow(10.0, a + t * (b - a));
  }
  out.front() = lo;
  if (count > 1) out.back() = hi;
  return out;
}

std::vector<std::size_t> logspace_int(std::size_t lo, std::size_t hi, std::size_t count) {
  std::vector<std::size_t> out;
  for (double v : logspace(static_cast<double>(lo), static_cast<double>(hi), count)) {
    out.push_back(static_cast<std::size_t>(std::llround(v)));
  }
  return out;
}

McReport mc_moments(const McConfig& cfg) {
  cfg.validate();
  const std::size_t H = max_horizon(cfg);
  const Signal z = clean_signal(cfg.signal, cfg.N + H);
  const std::size_t points = cfg.sweep_size();
  const std::size_t R = cfg.realizations;

  // errors[(p * R + r) * H + h - 1]; NaN marks a failed realization.
  std::vector<double> errors(points * R * H, std::numeric_limits<double>::quiet_NaN());
  parallel_for(points * R, cfg.threads, [&](std::size_t job) {
    const std::size_t p = job / R;
    const std::size_t r = job % R;
    const double sigma = cfg.sweep == SweepKind::sigma ? cfg.sigmas[p] : cfg.sigma;
    const std::size_t K = cfg.sweep == SweepKind::sigma ? cfg.K : cfg.Ks[p];
    const RealVector w = gaussian_noise(cfg.N, 1.0, mix_seed(cfg.seed, r));
    RealVector x(cfg.N);
    for (std::size_t n = 0; n < cfg.N; ++n) x[n] = z[n] + sigma * w[n];
    try {
      const ForecastModel model = fit_sigext(x, cfg.M, K, cfg.solver);
      const RealVector f =
          forecast(model, std::span<const double>(x).subspan(cfg.N - cfg.M), H);
      for (std::size_t h = 1; h <= H; ++h) {
        const double e = f[h - 1] - z[cfg.N - 1 + h];
        if (!std::isfinite(e)) return;
      }
      for (std::size_t h = 1; h <= H; ++h) {
        errors[job * H + h - 1] = f[h - 1] - z[cfg.N - 1 + h];
      }
    } catch (const NumericError&) {
      // counted as a failure below
    }
  });

  McReport report;
  report.sweep = cfg.sweep;
  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t h : cfg.horizons) {
      McPoint pt;
      pt.point = p;
      pt.sigma = cfg.sweep == SweepKind::sigma ? cfg.sigmas[p] : cfg.sigma;
      pt.K = cfg.sweep == SweepKind::sigma ? cfg.K : cfg.Ks[p];
      pt.horizon = h;
      CompensatedSum sum;
      CompensatedSum sq;
      for (std::size_t r = 0; r < R; ++r) {
        const double e = errors[(p * R + r) * H + h - 1];
        if (std::isnan(e)) {
          ++pt.failures;
          continue;
        }
        ++pt.samples;
        sum.add(e);
        sq.add(e * e);
      }
      if (pt.samples > 0) {
        const double n = static_cast<double>(pt.samples);
        pt.bias = sum.value() / n;
        pt.mse = sq.value() / n;
        CompensatedSum dev;
        for (std::size_t r = 0; r < R; ++r) {
          const double e = errors[(p * R + r) * H + h - 1];
          if (!std::isnan(e)) dev.add((e - pt.bias) * (e - pt.bias));
        }
        pt.variance = pt.samples > 1 ? dev.value() / (n - 1.0) : 0.0;
      }
      report.points.push_back(pt);
    }
  }
  report.slopes = fit_slopes(cfg.sweep, report.points);
  return report;
}

std::vector<McSlope> fit_slopes(SweepKind sweep, std::span<const McPoint> points) {
  std::vector<std::size_t> horizons;
  for (const auto& p : points) {
    if (std::find(horizons.begin(), horizons.end(), p.horizon) == horizons.end()) {
      horizons.push_back(p.horizon);
    }
  }
  std::vector<McSlope> out;
  for (std::size_t h : horizons) {
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      if (p.horizon == h && p.samples > 1 && p.variance > 0.0) floor = std::min(floor, p.variance);
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : points) {
      if (p.horizon != h || p.samples < 2 || !(p.variance > 0.0)) continue;
      if (sweep == SweepKind::sigma) {
        if (!(p.sigma > 0.0) || p.variance <= 10.0 * floor) continue;
        xs.push_back(p.sigma * p.sigma);
      } else {
        xs.push_back(static_cast<double>(p.K));
      }
      ys.push_back(p.variance);
    }
    McSlope s;
    s.horizon = h;
    s.points_used = xs.size();
    if (xs.size() >= 2) {
      s.fit = loglog_slope(xs, ys);
    } else {
      s.fit.slope = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(s);
  }
  return out;
}

void write_mc_csv(const McReport& report, std::ostream& out) {
  out << "point,sigma,K,horizon,bias,variance,mse,samples,failures\n";
  char line[256];
  for (const auto& p : report.points) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%zu,%zu,%.17g,%.17g,%.17g,%zu,%zu\n", p.point,
                  p.sigma, p.K, p.horizon, p.bias, p.variance, p.mse, p.samples, p.failures);
    out << line;
  }
}

// ---------------------------------------------------------------------------

DenseMatrix explicit_S(std::span<const HarmonicComponent> components, double sigma,
                       std::size_t M, int a, double fs) {
  if (M == 0) throw ConfigError("explicit_S: M must be positive");
  DenseMatrix S(M, M);
  const double m_total = static_cast<double>(M);
  for (const auto& c : components) {
    const double p = static_cast<double>(commensurate_index(c, M, fs));
    const double w = 0.5 * c.amplitude * c.amplitude;
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t mp = 0; mp < M; ++mp) {
        const double lag = static_cast<double>(m) + a - static_cast<double>(mp);
        S(m, mp) += w * std::cos(2.0 * std::numbers::pi * p * lag / m_total);
      }
    }
  }
  for (std::size_t m = 0; m < M; ++m) {
    const long mp = static_cast<long>(m) + a;
    if (mp >= 0 && mp < static_cast<long>(M)) S(m, static_cast<std::size_t>(mp)) += sigma * sigma;
  }
  return S;
}

DenseMatrix closed_form_S0_inv(std::span<const HarmonicComponent> components, double sigma,
                               std::size_t M, double fs) {
  check_oracle_args(sigma, M);
  const double s2 = sigma * sigma;
  const double m_total = static_cast<double>(M);
  DenseMatrix out(M, M);
  for (std::size_t m = 0; m < M; ++m) out(m, m) = 1.0 / s2;
  for (const auto& c : components) {
    const double p = static_cast<double>(commensurate_index(c, M, fs));
    const double coef = 2.0 / (m_total * s2) * shrink(sigma, M, c.amplitude);
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t mp = 0; mp < M; ++mp) {
        const double lag = static_cast<double>(m) - static_cast<double>(mp);
        out(m, mp) -= coef * std::cos(2.0 * std::numbers::pi * p * lag / m_total);
      }
    }
  }
  return out;
}

DenseMatrix closed_form_A0(std::span<const HarmonicComponent> components, double sigma,
                           std::size_t M, double fs) {
  check_oracle_args(sigma, M);
  const double m_total = static_cast<double>(M);
  DenseMatrix out(M, M);
  for (std::size_t m = 0; m + 1 < M; ++m) out(m, m + 1) = 1.0;
  for (const auto& c : components) {
    const double p = static_cast<double>(commensurate_index(c, M, fs));
    const double coef = 2.0 / m_total * shrink(sigma, M, c.amplitude);
    for (std::size_t mp = 0; mp < M; ++mp) {
      out(M - 1, mp) += coef * std::cos(2.0 * std::numbers::pi * p * static_cast<double>(mp) / m_total);
    }
  }
  return out;
}

std::vector<OraclePoint> oracle_convergence(const OracleConfig& cfg) {
  if (cfg.realizations == 0) throw ConfigError("oracle: realizations must be positive");
  if (cfg.Ks.empty()) throw ConfigError("oracle: K list is empty");
  const DenseMatrix A0 = closed_form_A0(cfg.signal.components, cfg.sigma, cfg.M);
  const auto target = A0.row(cfg.M - 1);
  std::vector<OraclePoint> out;
  for (std::size_t K : cfg.Ks) {
    if (K <= cfg.M) throw ConfigError("oracle: K must exceed M");
    const std::size_t n = K + cfg.M;
    const Signal z = sum_of_sines(cfg.signal.components, n, 1.0);
    std::vector<double> dev(cfg.realizations);
    parallel_for(cfg.realizations, 0, [&](std::size_t r) {
      const Signal x = add_noise(z, cfg.sigma, mix_seed(cfg.seed, K, r));
      const ForecastModel model = fit_sigext(x.samples(), cfg.M, K, Solver::normal_equations);
      double d = 0.0;
      for (std::size_t m = 0; m < cfg.M; ++m) d = std::max(d, std::abs(model.alpha[m] - target[m]));
      dev[r] = d;
    });
    CompensatedSum sum;
    for (double d : dev) sum.add(d);
    out.push_back({K, sum.value() / static_cast<double>(cfg.realizations)});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<BenchMethod> benchmark_methods() {
  return {
      {"sigext_M100", SigExtParams{100, 250, Solver::normal_equations}},
      {"sigext_M750", SigExtParams{750, 1875, Solver::normal_equations}},
      {"sigext_M1500", SigExtParams{1500, 3750, Solver::normal_equations}},
      {"symmetric", SymmetricParams{}},
      {"dmd_M750_r20", DmdParams{750, 1875, 20}},
  };
}

namespace {

double mean_of(std::span<const double> v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  CompensatedSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<BenchRow> bench_extensions(const BenchConfig& cfg, std::span<const BenchMethod> methods) {
  if (cfg.realizations == 0) throw ConfigError("bench: realizations must be positive");
  if (cfg.L == 0) throw ConfigError("bench: L must be positive");
  const std::size_t N = cfg.ahm.N;
  const Signal z = ahm_signal(cfg.ahm, N + cfg.L);
  const WindowSpec window = WindowSpec::gaussian(cfg.window_half);

  struct Tally {
    std::vector<double> mse;
    std::vector<double> D;
    double seconds = 0.0;
    std::size_t runs = 0;
    std::size_t diverged = 0;
    std::size_t failures = 0;
  };
  std::vector<Tally> tally(methods.size());

  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    const RealVector w = gaussian_noise(N + cfg.L, 1.0, mix_seed(cfg.seed, r));
    RealVector full(N + cfg.L);
    for (std::size_t n = 0; n < full.size(); ++n) full[n] = z[n] + cfg.sigma * w[n];
    const std::span<const double> observed(full.data(), N);
    const std::span<const double> truth(full.data() + N, cfg.L);

    TfrMatrix F;
    TfrMatrix F_opt;
    if (cfg.compute_D) {
      F = stft(Signal(RealVector(observed.begin(), observed.end()), cfg.ahm.fs), window, cfg.n_fft,
               cfg.hop);
      F_opt = restrict_to(stft(Signal(full, cfg.ahm.fs), window, cfg.n_fft, cfg.hop), N);
    }

    for (std::size_t m = 0; m < methods.size(); ++m) {
      Tally& t = tally[m];
      try {
        const auto start = std::chrono::steady_clock::now();
        const ExtensionResult ext = extend(observed, methods[m].extender, cfg.L);
        t.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ++t.runs;
        if (ext.diverged) ++t.diverged;
        t.mse.push_back(mse_xp(std::span<const double>(ext.samples).subspan(N), truth));
        if (cfg.compute_D) {
          const TfrMatrix Q =
              restrict_to(stft(Signal(ext.samples, cfg.ahm.fs), window, cfg.n_fft, cfg.hop), N);
          t.D.push_back(perf_index_D(Q, F, F_opt));
        }
      } catch (const NumericError&) {
        ++t.failures;
      }
    }
  }

  std::vector<BenchRow> rows;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const Tally& t = tally[m];
    BenchRow row;
    row.method = methods[m].name;
    row.mse_mean = mean_of(t.mse);
    row.mse_sd = sd_of(t.mse);
    row.D_mean = cfg.compute_D ? mean_of(t.D) : std::numeric_limits<double>::quiet_NaN();
    row.D_sd = cfg.compute_D ? sd_of(t.D) : std::numeric_limits<double>::quiet_NaN();
    row.seconds = t.runs > 0 ? t.seconds / static_cast<double>(t.runs) : 0.0;
    row.realizations = t.mse.size();
    row.diverged = t.diverged;
    row.failures = t.failures;
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out) {
  out << "method,mse_mean,mse_sd,D_stft_mean,D_stft_sd,seconds_per_extension,realizations,"
         "diverged,failures\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%zu,%zu,%zu\n", r.method.c_str(),
                  r.mse_mean, r.mse_sd, r.D_mean, r.D_sd, r.seconds, r.realizations, r.diverged,
                  r.failures);
    out << line;
  }
}

}  // namespace boundeff
