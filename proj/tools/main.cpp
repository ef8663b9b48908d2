#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boundeff/error.hpp"
#include "boundeff/extend.hpp"
#include "boundeff/io.hpp"
#include "boundeff/metrics.hpp"
#include "boundeff/pipeline.hpp"
#include "boundeff/tfr.hpp"
#include "boundeff/verify.hpp"

using namespace boundeff;

namespace {

struct ExtendFlags {
  std::string method = "sigext";
  std::size_t L = 0;
  std::size_t M = 0;  // 0: floor(1.5 L)
  std::size_t K = 0;  // 0: floor(2.5 M)
  std::size_t rank = 20;
  std::string solver = "normal";
};

struct TfrFlags {
  std::string kind = "stft";
  std::size_t half = 64;
  std::size_t n_fft = 0;  // 0: next power of two above the window length
  std::size_t hop = 1;
  double gamma_rel = 1e-4;
  bool causal = false;
  std::size_t tapers = 2;
  std::size_t projections = 30;
  std::uint64_t seed = 1;
};

void add_extend_options(CLI::App* cmd, ExtendFlags& f, bool method_required) {
  auto* opt = cmd->add_option(method_required ? "--method" : "--extend", f.method,
                              "Extension method: sigext, symmetric, dmd or none")
                  ->check(CLI::IsMember({"sigext", "symmetric", "dmd", "none"}));
  if (method_required) opt->required();
  cmd->add_option("--M", f.M, "Lag vector length (default floor(1.5 L))");
  cmd->add_option("--K", f.K, "Number of lag vectors (default floor(2.5 M))");
  cmd->add_option("--rank", f.rank, "DMD truncation rank")->capture_default_str();
  cmd->add_option("--solver", f.solver, "SigExt solver: normal or svd")
      ->check(CLI::IsMember({"normal", "svd"}))
      ->capture_default_str();
}

void add_tfr_options(CLI::App* cmd, TfrFlags& f) {
  cmd->add_option("--kind", f.kind, "stft, sst, rs or conceft")
      ->check(CLI::IsMember({"stft", "sst", "rs", "conceft"}))
      ->capture_default_str();
  cmd->add_option("--window-halflen", f.half, "Gaussian window half length")->capture_default_str();
  cmd->add_option("--nfft", f.n_fft, "FFT length (default: next power of two)");
  cmd->add_option("--hop", f.hop, "Hop size in samples")->capture_default_str();
  cmd->add_option("--gamma", f.gamma_rel, "Reassignment threshold relative to the peak")
      ->capture_default_str();
  cmd->add_flag("--causal", f.causal, "Causal time reassignment (rs)");
  cmd->add_option("--tapers", f.tapers, "Hermite tapers (conceft)")->capture_default_str();
  cmd->add_option("--projections", f.projections, "Random projections (conceft)")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "ConceFT seed")->capture_default_str();
}

ExtenderKind make_extender(const ExtendFlags& f, std::size_t L) {
  const std::size_t M = f.M != 0 ? f.M : default_M(L);
  const std::size_t K = f.K != 0 ? f.K : default_K(M);
  if (f.method == "sigext") return SigExtParams{M, K, solver_from_string(f.solver)};
  if (f.method == "symmetric") return SymmetricParams{};
  if (f.method == "dmd") return DmdParams{M, K, f.rank};
  return NoExtension{};
}

TfrKind make_tfr_kind(const TfrFlags& f) {
  if (f.kind == "sst") return SstKind{f.gamma_rel};
  if (f.kind == "rs") return RsKind{f.gamma_rel, f.causal};
  if (f.kind == "conceft") return ConceftKind{f.tapers, f.projections, f.gamma_rel, f.seed};
  return StftKind{};
}

std::size_t pick_nfft(const TfrFlags& f) {
  if (f.n_fft != 0) return f.n_fft;
  std::size_t n = 1;
  while (n < 2 * f.half + 1) n <<= 1;
  return n;
}

PipelineConfig make_pipeline(const TfrFlags& t, const ExtendFlags& e, std::size_t L) {
  PipelineConfig cfg;
  cfg.window = WindowSpec::gaussian(t.half);
  cfg.tfr = make_tfr_kind(t);
  cfg.n_fft = pick_nfft(t);
  cfg.hop = t.hop;
  cfg.L = L;
  cfg.extender = make_extender(e, L);
  return cfg;
}

std::optional<double> fs_option(double fs) {
  return fs > 0.0 ? std::optional<double>(fs) : std::nullopt;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void print_config() {
  const BenchConfig bench;
  std::printf("# extend\n");
  std::printf("extend.M = floor(1.5 L)\nextend.K = floor(2.5 M)\nextend.rank = 20\n");
  std::printf("extend.solver = normal\nextend.divergence_factor = %g\n", kDivergenceFactor);
  std::printf("# tfr\n");
  std::printf("tfr.window = gaussian, sigma = halflen / 4\ntfr.window_halflen = 64\n");
  std::printf("tfr.nfft = next power of two >= 2 halflen + 1\ntfr.hop = 1\ntfr.gamma = 1e-4\n");
  std::printf("tfr.conceft.tapers = 2\ntfr.conceft.projections = 30\n");
  std::printf("# bench-table1\n");
  std::printf("bench.N = %zu\nbench.P = %zu\nbench.p1 = %zu\nbench.p2 = %zu\nbench.fs = %g\n",
              bench.ahm.N, bench.ahm.P, bench.ahm.p1, bench.ahm.p2, bench.ahm.fs);
  std::printf("bench.sigma = %g\nbench.L = %zu\nbench.realizations = %zu\n", bench.sigma, bench.L,
              bench.realizations);
  std::printf("bench.stft = halflen %zu, nfft %zu, hop %zu\n", bench.window_half, bench.n_fft,
              bench.hop);
  for (const auto& m : benchmark_methods()) std::printf("bench.method = %s\n", m.name.c_str());
  std::printf("# verify-theorem\n");
  std::printf("verify.signal = cos(2 pi 10 n / 150) + 1.4 cos(2 pi 33 n / 150), N = 10000\n");
  std::printf("verify.M = 150\nverify.horizons = 1,10,100\nverify.realizations = 100\n");
  std::printf("verify.sigma_sweep = K 450, 15 points, sigma^2 in [1e-7, 1e-2], tol 0.15\n");
  std::printf("verify.K_sweep = sigma 1e-2, 12 points, K in [800, 2000], tol 0.25\n");
}

int run_extend(const std::string& input, double fs, const ExtendFlags& f, const std::string& output) {
  const Signal x = read_signal(input, fs_option(fs));
  const ExtensionResult ext = extend(x.samples(), make_extender(f, f.L), f.L);
  if (ext.diverged) std::fprintf(stderr, "warning: forecast diverged; tail held constant\n");
  write_signal_csv(Signal(ext.samples, x.fs()), output);
  return 0;
}

int run_tfr(const std::string& input, double fs, const TfrFlags& t, ExtendFlags e, std::size_t L,
            const std::string& out_csv, const std::string& out_pgm) {
  const Signal x = read_signal(input, fs_option(fs));
  TfrMatrix tfr;
  if (e.method == "none") {
    tfr = transform(x, make_tfr_kind(t), WindowSpec::gaussian(t.half), pick_nfft(t), t.hop);
  } else {
    bool diverged = false;
    tfr = bound_eff_red(x, make_pipeline(t, e, L != 0 ? L : t.half), &diverged);
    if (diverged) std::fprintf(stderr, "warning: forecast diverged; tail held constant\n");
  }
  write_tfr_csv(tfr, out_csv);
  if (!out_pgm.empty()) write_tfr_pgm(tfr, out_pgm);
  return 0;
}

int run_stream(const std::string& input, double fs, const TfrFlags& t, const ExtendFlags& e,
               std::size_t L, std::size_t chunk, std::size_t initial, const std::string& timing_out) {
  if (chunk == 0) throw ConfigError("stream: --chunk must be positive");
  const Signal x = read_signal(input, fs_option(fs));
  const PipelineConfig cfg = make_pipeline(t, e, e.method == "none" ? 0 : (L != 0 ? L : t.half));
  const std::size_t need =
      std::max<std::size_t>(1, required_history(cfg.extender, cfg.L));
  const std::size_t n0 = std::min(x.size(), std::max(initial != 0 ? initial : need, need));
  if (x.size() < need) throw ConfigError("stream: input shorter than the extender history");

  StreamState state(Signal(RealVector(x.vector().begin(), x.vector().begin() + n0), x.fs()), cfg);
  std::vector<double> t_forecast;
  std::vector<double> t_column;
  std::ofstream timing;
  if (!timing_out.empty()) {
    timing.open(timing_out);
    if (!timing) throw ConfigError("cannot open '" + timing_out + "' for writing");
    timing << "push,samples_seen,columns_updated,forecast_seconds,column_seconds\n";
  }
  std::size_t push = 0;
  for (std::size_t pos = n0; pos < x.size(); pos += chunk) {
    const std::size_t len = std::min(chunk, x.size() - pos);
    const auto deltas = state.push(x.samples().subspan(pos, len));
    t_forecast.push_back(state.last_forecast_seconds());
    t_column.push_back(state.last_column_seconds());
    if (timing) {
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.9g,%.9g\n", push, state.samples_seen(),
                    deltas.size(), state.last_forecast_seconds(), state.last_column_seconds());
      timing << line;
    }
    ++push;
  }

  const TfrMatrix batch = bound_eff_red(x, cfg);
  const TfrMatrix& live = state.tfr();
  if (batch.n_time != live.n_time || batch.n_freq != live.n_freq) {
    throw NumericError("stream: streamed matrix shape differs from batch");
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    diff = std::max(diff, std::abs(batch.values[i] - live.values[i]));
  }
  std::printf("pushes=%zu columns=%zu max_abs_diff_vs_batch=%.3g\n", push, live.n_time, diff);
  if (diff > 1e-12) throw NumericError("stream: streamed matrix deviates from batch");

  const double tf = median(t_forecast);
  const double tc = median(t_column);
  const TimingBudget budget = timing_budget(tf, tc, cfg.L, cfg.hop, x.fs());
  std::printf("forecast_seconds=%.6g column_seconds=%.6g L=%zu hop=%zu fs=%g feasible=%s",
              tf, tc, cfg.L, cfg.hop, x.fs(), budget.feasible ? "true" : "false");
  if (budget.min_hop) {
    std::printf(" min_hop=%zu\n", *budget.min_hop);
  } else {
    std::printf(" min_hop=none\n");
  }
  return 0;
}

int run_bench(std::size_t realizations, std::uint64_t seed, double sigma, bool no_d,
              const std::vector<std::string>& only, const std::string& out) {
  BenchConfig cfg;
  cfg.realizations = realizations;
  cfg.seed = seed;
  cfg.sigma = sigma;
  cfg.compute_D = !no_d;
  std::vector<BenchMethod> methods;
  for (auto& m : benchmark_methods()) {
    if (only.empty() || std::find(only.begin(), only.end(), m.name) != only.end()) {
      methods.push_back(m);
    }
  }
  if (methods.empty()) throw ConfigError("bench-table1: no method selected");
  const auto rows = bench_extensions(cfg, methods);
  if (out.empty() || out == "-") {
    write_bench_csv(rows, std::cout);
  } else {
    std::ofstream file(out);
    if (!file) throw ConfigError("cannot open '" + out + "' for writing");
    write_bench_csv(rows, file);
  }
  return 0;
}

int run_verify(const std::string& sweep, std::size_t realizations, std::uint64_t seed,
               std::size_t points, const std::string& solver, const std::string& out) {
  McConfig cfg;
  cfg.signal = two_tone_sines();
  cfg.realizations = realizations;
  cfg.seed = seed;
  cfg.solver = solver_from_string(solver);
  double tol = 0.15;
  double expected = 1.0;
  if (sweep == "sigma") {
    cfg.sweep = SweepKind::sigma;
    for (double s2 : logspace(1e-7, 1e-2, points != 0 ? points : 15)) cfg.sigmas.push_back(std::sqrt(s2));
  } else {
    cfg.sweep = SweepKind::K;
    cfg.Ks = logspace_int(800, 2000, points != 0 ? points : 12);
    tol = 0.25;
    expected = -1.0;
  }
  const McReport report = mc_moments(cfg);
  if (!out.empty()) {
    std::ofstream file(out);
    if (!file) throw ConfigError("cannot open '" + out + "' for writing");
    write_mc_csv(report, file);
  }
  bool all = true;
  for (const auto& s : report.slopes) {
    const bool pass = std::isfinite(s.fit.slope) && std::abs(s.fit.slope - expected) <= tol;
    all = all && pass;
    std::printf("slope=%.4f expected=%d pass=%s ell=%zu points=%zu\n", s.fit.slope,
                static_cast<int>(expected), pass ? "true" : "false", s.horizon, s.points_used);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-effect-free time-frequency analysis by signal extension"};
  app.require_subcommand(0, 1);
  bool show_config = false;
  app.add_flag("--print-config", show_config, "Print the default parameters and exit");

  std::string input;
  std::string output;
  double fs = 0.0;
  ExtendFlags ext_flags;
  TfrFlags tfr_flags;
  ExtendFlags pipe_ext;
  pipe_ext.method = "none";
  std::size_t pipe_L = 0;

  auto* extend_cmd = app.add_subcommand("extend", "Forecast L samples past the end of a signal");
  extend_cmd->add_option("--input", input, "Signal file (.csv or .wav)")->required();
  extend_cmd->add_option("--output", output, "Extended signal CSV")->required();
  extend_cmd->add_option("--L", ext_flags.L, "Extension length in samples")->required();
  extend_cmd->add_option("--fs", fs, "Sampling rate override (Hz)");
  add_extend_options(extend_cmd, ext_flags, true);

  std::string out_csv;
  std::string out_pgm;
  auto* tfr_cmd = app.add_subcommand("tfr", "Time-frequency representation, optionally extended");
  tfr_cmd->add_option("--input", input, "Signal file (.csv or .wav)")->required();
  tfr_cmd->add_option("--out-csv", out_csv, "Magnitude CSV")->required();
  tfr_cmd->add_option("--out-pgm", out_pgm, "16-bit PGM heatmap");
  tfr_cmd->add_option("--fs", fs, "Sampling rate override (Hz)");
  tfr_cmd->add_option("--L", pipe_L, "Extension length (default: window half length)");
  add_tfr_options(tfr_cmd, tfr_flags);
  add_extend_options(tfr_cmd, pipe_ext, false);

  std::size_t realizations = 50;
  std::uint64_t seed = 1;
  double sigma = 1e-2;
  bool no_d = false;
  std::vector<std::string> only;
  auto* bench_cmd = app.add_subcommand("bench-table1", "Extension benchmark on the AHM signal");
  bench_cmd->add_option("--realizations", realizations)->capture_default_str();
  bench_cmd->add_option("--seed", seed)->capture_default_str();
  bench_cmd->add_option("--sigma", sigma, "Noise level")->capture_default_str();
  bench_cmd->add_option("--methods", only, "Subset of method names");
  bench_cmd->add_flag("--no-index", no_d, "Skip the STFT performance index");
  bench_cmd->add_option("--out", output, "CSV path (default stdout)");

  std::string sweep = "sigma";
  std::size_t mc_realizations = 100;
  std::size_t points = 0;
  std::string mc_solver = "normal";
  auto* verify_cmd = app.add_subcommand("verify-theorem", "Monte Carlo variance scaling checks");
  verify_cmd->add_option("--sweep", sweep)->check(CLI::IsMember({"sigma", "K"}))->capture_default_str();
  verify_cmd->add_option("--realizations", mc_realizations)->capture_default_str();
  verify_cmd->add_option("--seed", seed)->capture_default_str();
  verify_cmd->add_option("--points", points, "Sweep points (default 15 for sigma, 12 for K)");
  verify_cmd->add_option("--solver", mc_solver)->check(CLI::IsMember({"normal", "svd"}))->capture_default_str();
  verify_cmd->add_option("--out", output, "McReport CSV");

  std::size_t chunk = 1;
  std::size_t initial = 0;
  std::string timing_out;
  auto* stream_cmd = app.add_subcommand("stream", "Replay a file through the streaming pipeline");
  stream_cmd->add_option("--input", input, "Signal file (.csv or .wav)")->required();
  stream_cmd->add_option("--chunk", chunk, "Samples per push")->capture_default_str();
  stream_cmd->add_option("--initial", initial, "Samples in the first batch (default: extender history)");
  stream_cmd->add_option("--fs", fs, "Sampling rate override (Hz)");
  stream_cmd->add_option("--L", pipe_L, "Extension length (default: window half length)");
  stream_cmd->add_option("--timing-out", timing_out, "Per-push timing CSV");
  add_tfr_options(stream_cmd, tfr_flags);
  add_extend_options(stream_cmd, pipe_ext, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (show_config) {
      print_config();
      return 0;
    }
    if (*extend_cmd) return run_extend(input, fs, ext_flags, output);
    if (*tfr_cmd) return run_tfr(input, fs, tfr_flags, pipe_ext, pipe_L, out_csv, out_pgm);
    if (*bench_cmd) return run_bench(realizations, seed, sigma, no_d, only, output);
    if (*verify_cmd) return run_verify(sweep, mc_realizations, seed, points, mc_solver, output);
    if (*stream_cmd) {
      return run_stream(input, fs, tfr_flags, pipe_ext, pipe_L, chunk, initial, timing_out);
    }
    std::cout << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
