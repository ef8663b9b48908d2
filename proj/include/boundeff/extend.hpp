#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>

#include "boundeff/numerics.hpp"
#include "boundeff/signal.hpp"

namespace boundeff {

// Column k of X holds x[s+k .. s+k+M-1] and column k of Y holds
// x[s+k+1 .. s+k+M], with s = N - K - M. Only the trailing K+M samples of the
// signal enter either matrix.
struct LagMatrices {
  DenseMatrix X;
  DenseMatrix Y;
};

LagMatrices build_lag_matrices(std::span<const double> x, std::size_t M, std::size_t K);

enum class Solver { normal_equations, svd };

const char* to_string(Solver solver);
Solver solver_from_string(const std::string& name);

// Last row of the companion-form dynamic model. The other M-1 rows are the
// unit shift and are never stored.
struct ForecastModel {
  RealVector alpha;
  std::size_t M = 0;
  std::size_t K = 0;
  Solver solver = Solver::normal_equations;
  double condition = 1.0;  // Cholesky pivot ratio squared, or sigma_max/sigma_min
  double jitter = 0.0;     // diagonal loading used by the normal-equations path
};

// Least-squares fit from explicitly materialized lag matrices.
ForecastModel fit_sigext(const LagMatrices& lm, Solver solver = Solver::normal_equations);

// Same estimate computed directly from the trailing K+M samples. The normal
// equations are assembled from the Hankel structure in O(K M + M^2) without
// building X; this is the path used by sig_ext and the pipeline.
ForecastModel fit_sigext(std::span<const double> x, std::size_t M, std::size_t K,
                         Solver solver = Solver::normal_equations);

// Autoregressive continuation x~[t] = sum_m alpha[m] buf[m] over a sliding
// buffer seeded with `tail` (the last M observed samples, oldest first).
RealVector forecast(const ForecastModel& model, std::span<const double> tail, std::size_t L);

struct GuardedForecast {
  RealVector values;
  bool diverged = false;
};

// forecast() with a divergence guard: once |x~| exceeds `limit` (or turns
// non-finite) the remaining values hold the last accepted value.
GuardedForecast forecast_guarded(const ForecastModel& model, std::span<const double> tail,
                                 std::size_t L, double limit);

// Forecast values beyond this multiple of the training window's max |x| are
// treated as divergence.
inline constexpr double kDivergenceFactor = 1e3;

// M = floor(1.5 L) and K = floor(2.5 M).
std::size_t default_M(std::size_t L);
std::size_t default_K(std::size_t M);

struct SigExtParams {
  std::size_t M = 0;
  std::size_t K = 0;
  Solver solver = Solver::normal_equations;
};

struct SymmetricParams {};

struct DmdParams {
  std::size_t M = 0;
  std::size_t K = 0;
  std::size_t rank = 0;
};

// Zero padding; the transform sees no extension at all.
struct NoExtension {};

using ExtenderKind = std::variant<NoExtension, SigExtParams, SymmetricParams, DmdParams>;

std::string describe(const ExtenderKind& kind);

struct ExtensionResult {
  RealVector samples;  // observed samples followed by the L forecast ones
  bool diverged = false;
};

// Number of trailing samples an extender reads from the observed signal.
std::size_t required_history(const ExtenderKind& kind, std::size_t L);

// Dispatches on the extender kind. NoExtension returns x unchanged.
ExtensionResult extend(std::span<const double> x, const ExtenderKind& kind, std::size_t L);

Signal sig_ext(const Signal& x, std::size_t M, std::size_t K, std::size_t L,
               Solver solver = Solver::normal_equations);

// Reflection about the last sample: x~[N-1+l] = x[N-1-l], l = 1..L.
Signal symmetric_ext(const Signal& x, std::size_t L);

// Rank-truncated dynamic mode decomposition on the same lag matrices.
Signal dmd_ext(const Signal& x, std::size_t M, std::size_t K, std::size_t L, std::size_t rank);

}  // namespace boundeff
