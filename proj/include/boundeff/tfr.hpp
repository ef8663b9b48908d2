#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "boundeff/numerics.hpp"
#include "boundeff/signal.hpp"

namespace boundeff {

// Sampled analysis window on m = -half_length .. half_length together with
// its analytic derivative (per sample) and the time-weighted window m*g[m].
class WindowSpec {
 public:
  enum class Kind { gaussian, hermite };

  // g[m] = exp(-m^2 / (2 s^2)), normalized to unit l2 norm. s defaults to
  // half_length / 4.
  static WindowSpec gaussian(std::size_t half_length, double shape = 0.0);

  // Orthonormalized Hermite function of the given order on the Gaussian
  // scale `shape` (same default). Order 0 coincides with gaussian().
  static WindowSpec hermite(std::size_t half_length, std::size_t order, double shape = 0.0);

  // Orders 0..count-1, jointly orthonormalized by Gram-Schmidt on the grid.
  static std::vector<WindowSpec> hermite_family(std::size_t half_length, std::size_t count,
                                                double shape = 0.0);

  Kind kind() const { return kind_; }
  std::size_t half_length() const { return half_length_; }
  std::size_t length() const { return 2 * half_length_ + 1; }
  double shape() const { return shape_; }
  std::size_t order() const { return order_; }

  // Indexed by m + half_length.
  std::span<const double> g() const { return g_; }
  std::span<const double> dg() const { return dg_; }
  std::span<const double> tg() const { return tg_; }

 private:
  Kind kind_ = Kind::gaussian;
  std::size_t half_length_ = 0;
  std::size_t order_ = 0;
  double shape_ = 0.0;
  std::vector<double> g_;
  std::vector<double> dg_;
  std::vector<double> tg_;
};

// F x T grid stored column by column (values[t * n_freq + f]).
struct TfrMatrix {
  std::size_t n_freq = 0;
  std::size_t n_time = 0;
  std::size_t hop = 1;
  bool real_valued = false;  // RS and ConceFT carry nonnegative reals
  std::vector<Complex> values;
  std::vector<double> freq_axis;  // Hz
  std::vector<double> time_axis;  // samples

  Complex at(std::size_t f, std::size_t t) const { return values[t * n_freq + f]; }
  std::span<const Complex> column(std::size_t t) const {
    return {values.data() + t * n_freq, n_freq};
  }
  std::span<Complex> column(std::size_t t) { return {values.data() + t * n_freq, n_freq}; }
};

struct StftKind {};
struct SstKind {
  double gamma_rel = 1e-4;
};
struct RsKind {
  double gamma_rel = 1e-4;
  bool causal = false;
};
struct ConceftKind {
  std::size_t n_tapers = 2;
  std::size_t n_projections = 30;
  double gamma_rel = 1e-4;
  std::uint64_t seed = 1;
};

using TfrKind = std::variant<StftKind, SstKind, RsKind, ConceftKind>;

std::string describe(const TfrKind& kind);

// Transform geometry shared by all kinds.
struct TfrGrid {
  std::size_t n_fft = 0;
  std::size_t hop = 1;
  double fs = 1.0;

  std::size_t n_freq() const { return n_fft / 2 + 1; }
  // Columns sit at sample n*hop for n*hop < length.
  std::size_t columns_for(std::size_t length) const { return (length + hop - 1) / hop; }
};

// Reassigned mass that fell outside the grid.
struct TfrDiagnostics {
  std::size_t dropped_count = 0;
  double dropped_energy = 0.0;   // RS: |V|^2 mass
  Complex dropped_mass{};        // SST: complex mass
};

// Signal samples addressed by absolute index. data[i] is sample offset+i;
// samples in [0, total) outside the view must not be requested, and indices
// outside [0, total) read as zero.
struct SampleView {
  std::span<const double> data;
  std::size_t offset = 0;
  std::size_t total = 0;

  double at(long long index) const;
};

// Number of columns on either side over which RS may move energy.
std::size_t time_reach(const TfrKind& kind, const WindowSpec& window, std::size_t hop);

// Computes output columns [c0, c1) of the transform of the whole signal
// described by `x`. Columns are written to `out` (size (c1-c0)*n_freq).
// For every kind the result is bit-identical to the same columns of a full
// computation; RS internally visits the source columns within time_reach.
void compute_columns(const TfrKind& kind, const WindowSpec& window, const TfrGrid& grid,
                     const SampleView& x, std::size_t c0, std::size_t c1, std::span<Complex> out,
                     TfrDiagnostics* diag = nullptr);

// Full transform of a signal (zero outside its support).
TfrMatrix transform(const Signal& x, const TfrKind& kind, const WindowSpec& window,
                    std::size_t n_fft, std::size_t hop, TfrDiagnostics* diag = nullptr);

TfrMatrix stft(const Signal& x, const WindowSpec& window, std::size_t n_fft, std::size_t hop);
TfrMatrix sst(const Signal& x, const WindowSpec& window, std::size_t n_fft, std::size_t hop,
              double gamma_rel = 1e-4, TfrDiagnostics* diag = nullptr);
TfrMatrix reassignment(const Signal& x, const WindowSpec& window, std::size_t n_fft,
                       std::size_t hop, double gamma_rel = 1e-4, bool causal = false,
                       TfrDiagnostics* diag = nullptr);
TfrMatrix conceft(const Signal& x, const WindowSpec& window, std::size_t n_tapers,
                  std::size_t n_projections, std::size_t n_fft, std::size_t hop,
                  double gamma_rel = 1e-4, std::uint64_t seed = 1);

// Lower-level SST over an arbitrary (possibly complex) window with its
// derivative; used by conceft for random multitaper combinations.
TfrMatrix sst_with_window(const Signal& x, std::span<const Complex> g, std::span<const Complex> dg,
                          std::size_t n_fft, std::size_t hop, double gamma_rel,
                          TfrDiagnostics* diag = nullptr);

// Empty matrix with axes for `n_time` columns.
TfrMatrix make_tfr(const TfrGrid& grid, std::size_t n_time, bool real_valued);

bool is_real_valued(const TfrKind& kind);

}  // namespace boundeff
