#include "boundeff/tfr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "boundeff/error.hpp"

namespace boundeff {

// ---------------------------------------------------------------------------
// Windows

namespace {

double default_shape(std::size_t half_length, double shape) {
  if (shape > 0.0) return shape;
  return std::max(1.0, static_cast<double>(half_length) / 4.0);
}

void check_half_length(std::size_t half_length) {
  if (half_length == 0) throw ConfigError("window: half length must be positive");
}

}  // namespace

WindowSpec WindowSpec::gaussian(std::size_t half_length, double shape) {
  check_half_length(half_length);
  WindowSpec w;
  w.kind_ = Kind::gaussian;
  w.half_length_ = half_length;
  w.shape_ = default_shape(half_length, shape);
  const std::size_t len = w.length();
  w.g_.resize(len);
  w.dg_.resize(len);
  w.tg_.resize(len);
  const double s2 = w.shape_ * w.shape_;
  double energy = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double m = static_cast<double>(i) - static_cast<double>(half_length);
    w.g_[i] = std::exp(-m * m / (2.0 * s2));
    energy += w.g_[i] * w.g_[i];
  }
  const double norm = 1.0 / std::sqrt(energy);
  for (std::size_t i = 0; i < len; ++i) {
    const double m = static_cast<double>(i) - static_cast<double>(half_length);
    w.g_[i] *= norm;
    w.dg_[i] = -m / s2 * w.g_[i];
    w.tg_[i] = m * w.g_[i];
  }
  return w;
}

std::vector<WindowSpec> WindowSpec::hermite_family(std::size_t half_length, std::size_t count,
                                                   double shape) {
  check_half_length(half_length);
  if (count == 0) throw ConfigError("hermite_family: need at least one window");
  const double s = default_shape(half_length, shape);
  const std::size_t len = 2 * half_length + 1;

  // Unnormalized Hermite functions He_k(t) exp(-t^2/2), t = m/s, and their
  // derivatives with respect to m.
  std::vector<std::vector<double>> h(count, std::vector<double>(len));
  std::vector<std::vector<double>> dh(count, std::vector<double>(len));
  for (std::size_t i = 0; i < len; ++i) {
    const double m = static_cast<double>(i) - static_cast<double>(half_length);
    const double t = m / s;
    const double env = std::exp(-t * t / 2.0);
    double prev = 0.0;  // He_{k-1}
    double cur = 1.0;   // He_k
    for (std::size_t k = 0; k < count; ++k) {
      h[k][i] = cur * env;
      dh[k][i] = (static_cast<double>(k) * prev - t * cur) * env / s;
      const double next = t * cur - static_cast<double>(k) * prev;
      prev = cur;
      cur = next;
    }
  }

  // Modified Gram-Schmidt, two sweeps; the same combination is applied to
  // the derivatives so dg stays the derivative of g.
  for (std::size_t k = 0; k < count; ++k) {
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t j = 0; j < k; ++j) {
        double proj = 0.0;
        for (std::size_t i = 0; i < len; ++i) proj += h[k][i] * h[j][i];
        for (std::size_t i = 0; i < len; ++i) {
          h[k][i] -= proj * h[j][i];
          dh[k][i] -= proj * dh[j][i];
        }
      }
    }
    double energy = 0.0;
    for (double v : h[k]) energy += v * v;
    if (!(energy > 0.0)) throw NumericError("hermite_family: degenerate window");
    const double norm = 1.0 / std::sqrt(energy);
    for (std::size_t i = 0; i < len; ++i) {
      h[k][i] *= norm;
      dh[k][i] *= norm;
    }
  }

  std::vector<WindowSpec> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    WindowSpec& w = out[k];
    w.kind_ = Kind::hermite;
    w.half_length_ = half_length;
    w.order_ = k;
    w.shape_ = s;
    w.g_ = std::move(h[k]);
    w.dg_ = std::move(dh[k]);
    w.tg_.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      w.tg_[i] = (static_cast<double>(i) - static_cast<double>(half_length)) * w.g_[i];
    }
  }
  return out;
}

WindowSpec WindowSpec::hermite(std::size_t half_length, std::size_t order, double shape) {
  auto family = hermite_family(half_length, order + 1, shape);
  return std::move(family.back());
}

// ---------------------------------------------------------------------------
// Helpers

std::string describe(const TfrKind& kind) {
  std::ostringstream out;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, StftKind>) {
          out << "stft";
        } else if constexpr (std::is_same_v<T, SstKind>) {
          out << "sst(gamma_rel=" << k.gamma_rel << ")";
        } else if constexpr (std::is_same_v<T, RsKind>) {
          out << "rs(gamma_rel=" << k.gamma_rel << ",causal=" << (k.causal ? "true" : "false")
              << ")";
        } else {
          out << "conceft(J=" << k.n_tapers << ",R=" << k.n_projections
              << ",gamma_rel=" << k.gamma_rel << ",seed=" << k.seed << ")";
        }
      },
      kind);
  return out.str();
}

bool is_real_valued(const TfrKind& kind) {
  return std::holds_alternative<RsKind>(kind) || std::holds_alternative<ConceftKind>(kind);
}

double SampleView::at(long long index) const {
  if (index < 0 || index >= static_cast<long long>(total)) return 0.0;
  const auto rel = index - static_cast<long long>(offset);
  if (rel < 0 || rel >= static_cast<long long>(data.size())) {
    throw std::out_of_range("SampleView: sample outside the retained history");
  }
  return data[static_cast<std::size_t>(rel)];
}

TfrMatrix make_tfr(const TfrGrid& grid, std::size_t n_time, bool real_valued) {
  TfrMatrix m;
  m.n_freq = grid.n_freq();
  m.n_time = n_time;
  m.hop = grid.hop;
  m.real_valued = real_valued;
  m.values.assign(m.n_freq * n_time, Complex{});
  m.freq_axis.resize(m.n_freq);
  for (std::size_t k = 0; k < m.n_freq; ++k) {
    m.freq_axis[k] = static_cast<double>(k) * grid.fs / static_cast<double>(grid.n_fft);
  }
  m.time_axis.resize(n_time);
  for (std::size_t t = 0; t < n_time; ++t) m.time_axis[t] = static_cast<double>(t * grid.hop);
  return m;
}

std::size_t time_reach(const TfrKind& kind, const WindowSpec& window, std::size_t hop) {
  if (!std::holds_alternative<RsKind>(kind)) return 0;
  return (window.half_length() + hop - 1) / hop;
}

namespace {

void check_grid(const TfrGrid& grid, std::size_t half_length) {
  if (grid.hop == 0) throw ConfigError("transform: hop must be at least 1");
  if (grid.n_fft < 2 * half_length + 1) {
    throw ConfigError("transform: window longer than n_fft");
  }
  if (!(grid.fs > 0.0)) throw ConfigError("transform: sampling rate must be positive");
}

std::vector<Complex> to_complex(std::span<const double> v) {
  return {v.begin(), v.end()};
}

// Windowed FFTs of one column. The slice x[n*hop + m], |m| <= half_length,
// is placed at FFT index m mod n_fft so the phase is referenced to the
// window center.
class ColumnEngine {
 public:
  ColumnEngine(const TfrGrid& grid, std::size_t half_length)
      : grid_(grid), half_(half_length), plan_(grid.n_fft), slice_(2 * half_length + 1) {}

  const TfrGrid& grid() const { return grid_; }

  void load(const SampleView& x, std::size_t column) {
    const long long center = static_cast<long long>(column * grid_.hop);
    for (std::size_t i = 0; i < slice_.size(); ++i) {
      slice_[i] = x.at(center + static_cast<long long>(i) - static_cast<long long>(half_));
    }
  }

  void windowed_fft(std::span<const Complex> win, std::vector<Complex>& out) const {
    out.assign(grid_.n_fft, Complex{});
    const std::size_t n = grid_.n_fft;
    for (std::size_t i = 0; i < slice_.size(); ++i) {
      const std::size_t idx = (i + n - half_) % n;
      out[idx] = slice_[i] * win[i];
    }
    plan_.forward(out);
  }

 private:
  TfrGrid grid_;
  std::size_t half_;
  FftPlan plan_;
  std::vector<double> slice_;
};

// Instantaneous-frequency estimate in bin units for bin k.
double reassigned_bin(std::size_t k, Complex vg, Complex vdg, std::size_t n_fft) {
  const double im = (vdg / vg).imag();
  return static_cast<double>(k) - static_cast<double>(n_fft) * im / (2.0 * std::numbers::pi);
}

bool to_bin(double bin, std::size_t n_freq, std::size_t& out) {
  const double r = std::nearbyint(bin);
  if (!(r >= 0.0) || !(r < static_cast<double>(n_freq))) return false;
  out = static_cast<std::size_t>(r);
  return true;
}

double column_threshold(std::span<const Complex> v, std::size_t n_freq, double gamma_rel) {
  double vmax = 0.0;
  for (std::size_t k = 0; k < n_freq; ++k) vmax = std::max(vmax, std::abs(v[k]));
  return gamma_rel * vmax;
}

// One synchrosqueezed column for an arbitrary window pair.
void sst_column(ColumnEngine& eng, std::span<const Complex> g, std::span<const Complex> dg,
                double gamma_rel, std::vector<Complex>& vg, std::vector<Complex>& vdg,
                std::span<Complex> out, TfrDiagnostics* diag) {
  eng.windowed_fft(g, vg);
  eng.windowed_fft(dg, vdg);
  const std::size_t n_freq = eng.grid().n_freq();
  const double gamma = column_threshold(vg, n_freq, gamma_rel);
  for (std::size_t k = 0; k < n_freq; ++k) {
    if (!(std::abs(vg[k]) > gamma)) continue;
    std::size_t target = 0;
    if (to_bin(reassigned_bin(k, vg[k], vdg[k], eng.grid().n_fft), n_freq, target)) {
      out[target] += vg[k];
    } else if (diag != nullptr) {
      ++diag->dropped_count;
      diag->dropped_mass += vg[k];
    }
  }
}

void check_gamma(double gamma_rel) {
  if (!(gamma_rel > 0.0 && gamma_rel < 1.0)) {
    throw ConfigError("transform: gamma_rel must lie in (0, 1)");
  }
}

void require_gaussian(const WindowSpec& window, const char* what) {
  if (window.kind() != WindowSpec::Kind::gaussian) {
    throw ConfigError(std::string(what) + ": requires a gaussian window");
  }
}

struct ConceftWindows {
  std::vector<std::vector<Complex>> g;
  std::vector<std::vector<Complex>> dg;
};

// Random unit vectors u in C^J (complex Gaussian directions); the
// combined windows are sum_j u_j h_j and sum_j u_j h_j'.
ConceftWindows conceft_windows(const WindowSpec& base, const ConceftKind& k) {
  if (k.n_tapers == 0) throw ConfigError("conceft: J must be at least 1");
  if (k.n_projections == 0) throw ConfigError("conceft: R must be at least 1");
  const auto family = WindowSpec::hermite_family(base.half_length(), k.n_tapers, base.shape());
  const std::size_t len = base.length();
  ConceftWindows w;
  for (std::size_t r = 0; r < k.n_projections; ++r) {
    const RealVector draws = gaussian_noise(2 * k.n_tapers, 1.0, mix_seed(k.seed, r));
    std::vector<Complex> u(k.n_tapers);
    double norm = 0.0;
    for (std::size_t j = 0; j < k.n_tapers; ++j) {
      u[j] = {draws[2 * j], draws[2 * j + 1]};
      norm += std::norm(u[j]);
    }
    norm = std::sqrt(norm);
    std::vector<Complex> g(len, Complex{});
    std::vector<Complex> dg(len, Complex{});
    for (std::size_t j = 0; j < k.n_tapers; ++j) {
      const Complex uj = u[j] / norm;
      for (std::size_t i = 0; i < len; ++i) {
        g[i] += uj * family[j].g()[i];
        dg[i] += uj * family[j].dg()[i];
      }
    }
    w.g.push_back(std::move(g));
    w.dg.push_back(std::move(dg));
  }
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Column computation

void compute_columns(const TfrKind& kind, const WindowSpec& window, const TfrGrid& grid,
                     const SampleView& x, std::size_t c0, std::size_t c1, std::span<Complex> out,
                     TfrDiagnostics* diag) {
  check_grid(grid, window.half_length());
  const std::size_t n_freq = grid.n_freq();
  if (c1 < c0) throw ConfigError("compute_columns: empty range");
  if (out.size() != (c1 - c0) * n_freq) throw ConfigError("compute_columns: output size mismatch");
  std::fill(out.begin(), out.end(), Complex{});
  if (c0 == c1) return;

  ColumnEngine eng(grid, window.half_length());
  std::vector<Complex> vg;
  std::vector<Complex> vdg;
  std::vector<Complex> vtg;

  if (std::holds_alternative<StftKind>(kind)) {
    const auto g = to_complex(window.g());
    for (std::size_t c = c0; c < c1; ++c) {
      eng.load(x, c);
      eng.windowed_fft(g, vg);
      std::copy_n(vg.begin(), n_freq, out.begin() + static_cast<std::ptrdiff_t>((c - c0) * n_freq));
    }
    return;
  }

  if (const auto* k = std::get_if<SstKind>(&kind)) {
    check_gamma(k->gamma_rel);
    require_gaussian(window, "sst");
    const auto g = to_complex(window.g());
    const auto dg = to_complex(window.dg());
    for (std::size_t c = c0; c < c1; ++c) {
      eng.load(x, c);
      sst_column(eng, g, dg, k->gamma_rel, vg, vdg, out.subspan((c - c0) * n_freq, n_freq), diag);
    }
    return;
  }

  if (const auto* k = std::get_if<ConceftKind>(&kind)) {
    check_gamma(k->gamma_rel);
    const ConceftWindows wins = conceft_windows(window, *k);
    std::vector<Complex> col(n_freq);
    const double inv_r = 1.0 / static_cast<double>(k->n_projections);
    for (std::size_t c = c0; c < c1; ++c) {
      eng.load(x, c);
      auto dst = out.subspan((c - c0) * n_freq, n_freq);
      for (std::size_t r = 0; r < wins.g.size(); ++r) {
        std::fill(col.begin(), col.end(), Complex{});
        sst_column(eng, wins.g[r], wins.dg[r], k->gamma_rel, vg, vdg, col, diag);
        for (std::size_t f = 0; f < n_freq; ++f) dst[f] += std::abs(col[f]);
      }
      for (std::size_t f = 0; f < n_freq; ++f) dst[f] *= inv_r;
    }
    return;
  }

  // Reassignment: energy moves in time as well, so sources within the reach
  // of [c0, c1) are visited in ascending order and only targets inside the
  // range are accumulated. Per target the summation order is therefore the
  // same as for a full computation.
  const auto& rs = std::get<RsKind>(kind);
  check_gamma(rs.gamma_rel);
  require_gaussian(window, "reassignment");
  const std::size_t total_cols = grid.columns_for(x.total);
  const std::size_t reach = time_reach(kind, window, grid.hop);
  const std::size_t src0 = c0 > reach ? c0 - reach : 0;
  const std::size_t src1 = std::min(total_cols, c1 + reach);
  const auto g = to_complex(window.g());
  const auto dg = to_complex(window.dg());
  const auto tg = to_complex(window.tg());
  const double hop = static_cast<double>(grid.hop);
  const double max_shift = static_cast<double>(window.half_length());
  for (std::size_t s = src0; s < src1; ++s) {
    eng.load(x, s);
    eng.windowed_fft(g, vg);
    eng.windowed_fft(dg, vdg);
    eng.windowed_fft(tg, vtg);
    const bool own = s >= c0 && s < c1;
    const double gamma = column_threshold(vg, n_freq, rs.gamma_rel);
    const double t_src = static_cast<double>(s) * hop;
    for (std::size_t k = 0; k < n_freq; ++k) {
      const double mag = std::abs(vg[k]);
      if (!(mag > gamma)) continue;
      const double energy = mag * mag;
      double shift = (vtg[k] / vg[k]).real();
      if (rs.causal) shift = std::min(shift, 0.0);
      std::size_t bin = 0;
      const bool freq_ok = to_bin(reassigned_bin(k, vg[k], vdg[k], grid.n_fft), n_freq, bin);
      const double tcol = std::nearbyint((t_src + shift) / hop);
      const bool time_ok = std::abs(shift) <= max_shift && tcol >= 0.0 &&
                           tcol < static_cast<double>(total_cols);
      if (!freq_ok || !time_ok) {
        if (own && diag != nullptr) {
          ++diag->dropped_count;
          diag->dropped_energy += energy;
        }
        continue;
      }
      const auto target = static_cast<std::size_t>(tcol);
      if (target < c0 || target >= c1) continue;
      out[(target - c0) * n_freq + bin] += energy;
    }
  }
}

TfrMatrix transform(const Signal& x, const TfrKind& kind, const WindowSpec& window,
                    std::size_t n_fft, std::size_t hop, TfrDiagnostics* diag) {
  const TfrGrid grid{n_fft, hop, x.fs()};
  check_grid(grid, window.half_length());
  TfrMatrix m = make_tfr(grid, grid.columns_for(x.size()), is_real_valued(kind));
  const SampleView view{x.samples(), 0, x.size()};
  compute_columns(kind, window, grid, view, 0, m.n_time, m.values, diag);
  return m;
}

TfrMatrix stft(const Signal& x, const WindowSpec& window, std::size_t n_fft, std::size_t hop) {
  return transform(x, StftKind{}, window, n_fft, hop);
}

TfrMatrix sst(const Signal& x, const WindowSpec& window, std::size_t n_fft, std::size_t hop,
              double gamma_rel, TfrDiagnostics* diag) {
  return transform(x, SstKind{gamma_rel}, window, n_fft, hop, diag);
}

TfrMatrix reassignment(const Signal& x, const WindowSpec& window, std::size_t n_fft,
                       std::size_t hop, double gamma_rel, bool causal, TfrDiagnostics* diag) {
  return transform(x, RsKind{gamma_rel, causal}, window, n_fft, hop, diag);
}

TfrMatrix conceft(const Signal& x, const WindowSpec& window, std::size_t n_tapers,
                  std::size_t n_projections, std::size_t n_fft, std::size_t hop,
                  double gamma_rel, std::uint64_t seed) {
  return transform(x, ConceftKind{n_tapers, n_projections, gamma_rel, seed}, window, n_fft, hop);
}

TfrMatrix sst_with_window(const Signal& x, std::span<const Complex> g, std::span<const Complex> dg,
                          std::size_t n_fft, std::size_t hop, double gamma_rel,
                          TfrDiagnostics* diag) {
  if (g.size() != dg.size() || g.size() % 2 == 0) {
    throw ConfigError("sst_with_window: window and derivative must share an odd length");
  }
  check_gamma(gamma_rel);
  const std::size_t half = g.size() / 2;
  const TfrGrid grid{n_fft, hop, x.fs()};
  check_grid(grid, half);
  TfrMatrix m = make_tfr(grid, grid.columns_for(x.size()), false);
  const SampleView view{x.samples(), 0, x.size()};
  ColumnEngine eng(grid, half);
  std::vector<Complex> vg;
  std::vector<Complex> vdg;
  for (std::size_t c = 0; c < m.n_time; ++c) {
    eng.load(view, c);
    sst_column(eng, g, dg, gamma_rel, vg, vdg, m.column(c), diag);
  }
  return m;
}

}  // namespace boundeff
