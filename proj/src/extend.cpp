#include "boundeff/extend.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "boundeff/error.hpp"

namespace boundeff {

namespace {

void check_sizes(std::size_t n, std::size_t M, std::size_t K) {
  if (M == 0 || K == 0) throw ConfigError("lag matrices: M and K must be positive");
  // M = K = 1 is allowed so a two-sample signal still yields a 1x1 model.
  if (M >= K && !(M == 1 && K == 1)) throw ConfigError("lag matrices: M must be smaller than K");
  if (K + M > n) {
    std::ostringstream msg;
    msg << "lag matrices: K+M=" << K + M << " exceeds the signal length " << n;
    throw ConfigError(msg.str());
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

ForecastModel finish_normal_equations(const DenseMatrix& gram, std::span<const double> rhs,
                                      std::size_t M, std::size_t K) {
  const SpdSolution sol = solve_spd_detailed(gram, rhs);
  ForecastModel model;
  model.alpha = sol.x;
  model.M = M;
  model.K = K;
  model.solver = Solver::normal_equations;
  model.condition = sol.condition;
  model.jitter = sol.jitter;
  require_finite(model.alpha, "fit_sigext");
  return model;
}

// alpha = y^T X^+ solved as the minimal-norm solution of X^T alpha = y.
ForecastModel finish_svd(const DenseMatrix& x, std::span<const double> y, std::size_t M,
                         std::size_t K) {
  const PinvSolution sol = pinv_apply_detailed(x.transposed(), y);
  ForecastModel model;
  model.alpha = sol.x;
  model.M = M;
  model.K = K;
  model.solver = Solver::svd;
  model.condition = sol.condition;
  require_finite(model.alpha, "fit_sigext");
  return model;
}

}  // namespace

const char* to_string(Solver solver) {
  return solver == Solver::svd ? "svd" : "normal";
}

Solver solver_from_string(const std::string& name) {
  if (name == "normal" || name == "normal-equations" || name == "normal_equations") {
    return Solver::normal_equations;
  }
  if (name == "svd") return Solver::svd;
  throw ConfigError("unknown solver '" + name + "' (expected normal or svd)");
}

LagMatrices build_lag_matrices(std::span<const double> x, std::size_t M, std::size_t K) {
  check_sizes(x.size(), M, K);
  const std::size_t s = x.size() - K - M;
  LagMatrices lm{DenseMatrix(M, K), DenseMatrix(M, K)};
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      lm.X(m, k) = x[s + k + m];
      lm.Y(m, k) = x[s + k + m + 1];
    }
  }
  return lm;
}

ForecastModel fit_sigext(const LagMatrices& lm, Solver solver) {
  const std::size_t M = lm.X.rows();
  const std::size_t K = lm.X.cols();
  if (M == 0 || K == 0 || lm.Y.rows() != M || lm.Y.cols() != K) {
    throw ConfigError("fit_sigext: malformed lag matrices");
  }
  const auto y = lm.Y.row(M - 1);
  if (solver == Solver::svd) return finish_svd(lm.X, y, M, K);

  DenseMatrix gram(M, M);
  RealVector rhs(M, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    const auto xi = lm.X.row(i);
    for (std::size_t j = i; j < M; ++j) {
      const auto xj = lm.X.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += xi[k] * xj[k];
      gram(i, j) = acc;
      gram(j, i) = acc;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += xi[k] * y[k];
    rhs[i] = acc;
  }
  return finish_normal_equations(gram, rhs, M, K);
}

ForecastModel fit_sigext(std::span<const double> x, std::size_t M, std::size_t K, Solver solver) {
  check_sizes(x.size(), M, K);
  require_finite(x, "fit_sigext");
  if (solver == Solver::svd) {
    const LagMatrices lm = build_lag_matrices(x, M, K);
    return finish_svd(lm.X, lm.Y.row(M - 1), M, K);
  }

  // Gram matrix of the (M+1)-long lag vectors v_k = x[s+k .. s+k+M]:
  //   G[i][j] = sum_{k<K} x[s+i+k] x[s+j+k]
  // Its leading MxM block is X X^T and its last column is X y.
  const std::size_t s = x.size() - K - M;
  const double* base = x.data() + s;
  const std::size_t dim = M + 1;
  DenseMatrix g(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += base[k] * base[j + k];
    g(0, j) = acc;
  }
  for (std::size_t i = 0; i + 1 < dim; ++i) {
    const double add_i = base[i + K];
    const double drop_i = base[i];
    for (std::size_t j = i; j + 1 < dim; ++j) {
      g(i + 1, j + 1) = g(i, j) + add_i * base[j + K] - drop_i * base[j];
    }
  }
  DenseMatrix gram(M, M);
  RealVector rhs(M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = i; j < M; ++j) {
      gram(i, j) = g(i, j);
      gram(j, i) = g(i, j);
    }
    rhs[i] = g(i, M);
  }
  return finish_normal_equations(gram, rhs, M, K);
}

RealVector forecast(const ForecastModel& model, std::span<const double> tail, std::size_t L) {
  return forecast_guarded(model, tail, L, std::numeric_limits<double>::infinity()).values;
}

GuardedForecast forecast_guarded(const ForecastModel& model, std::span<const double> tail,
                                 std::size_t L, double limit) {
  const std::size_t M = model.alpha.size();
  if (M == 0) throw ConfigError("forecast: empty model");
  if (tail.size() != M) throw ConfigError("forecast: tail length must equal M");
  for (double a : model.alpha) {
    if (!std::isfinite(a)) throw NumericError("forecast: model has non-finite coefficients");
  }
  GuardedForecast out;
  if (L == 0) return out;
  RealVector work(tail.begin(), tail.end());
  work.reserve(M + L);
  out.values.reserve(L);
  for (std::size_t t = 0; t < L; ++t) {
    double next = 0.0;
    if (!out.diverged) {
      const double* buf = work.data() + t;
      for (std::size_t m = 0; m < M; ++m) next += model.alpha[m] * buf[m];
      if (!std::isfinite(next) || std::abs(next) > limit) {
        out.diverged = true;
      }
    }
    if (out.diverged) next = t == 0 ? tail.back() : out.values.back();
    work.push_back(next);
    out.values.push_back(next);
  }
  return out;
}

std::size_t default_M(std::size_t L) { return (3 * L) / 2; }
std::size_t default_K(std::size_t M) { return (5 * M) / 2; }

std::string describe(const ExtenderKind& kind) {
  std::ostringstream out;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NoExtension>) {
          out << "none";
        } else if constexpr (std::is_same_v<T, SigExtParams>) {
          out << "sigext(M=" << k.M << ",K=" << k.K << ",solver=" << to_string(k.solver) << ")";
        } else if constexpr (std::is_same_v<T, SymmetricParams>) {
          out << "symmetric";
        } else {
          out << "dmd(M=" << k.M << ",K=" << k.K << ",rank=" << k.rank << ")";
        }
      },
      kind);
  return out.str();
}

std::size_t required_history(const ExtenderKind& kind, std::size_t L) {
  return std::visit(
      [&](const auto& k) -> std::size_t {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, NoExtension>) {
          return 0;
        } else if constexpr (std::is_same_v<T, SymmetricParams>) {
          return L + 1;
        } else {
          return k.K + k.M;
        }
      },
      kind);
}

namespace {

GuardedForecast dmd_forecast(std::span<const double> x, const DmdParams& p, std::size_t L) {
  if (p.rank == 0 || p.rank > p.M) throw ConfigError("dmd_ext: rank must lie in [1, M]");
  const LagMatrices lm = build_lag_matrices(x, p.M, p.K);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> xm(lm.X.data().data(), static_cast<Eigen::Index>(p.M),
                                       static_cast<Eigen::Index>(p.K));
  const Eigen::Map<const RowMatrix> ym(lm.Y.data().data(), static_cast<Eigen::Index>(p.M),
                                       static_cast<Eigen::Index>(p.K));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(xm), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const auto r = static_cast<Eigen::Index>(p.rank);
  std::size_t usable = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) >= 1e-12 * s(0) && s(0) > 0.0) ++usable;
  }
  if (p.rank > usable) {
    std::ostringstream msg;
    msg << "dmd_ext: rank " << p.rank << " exceeds the numerical rank of X (usable rank "
        << usable << ")";
    throw NumericError(msg.str());
  }
  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  const Eigen::VectorXd inv_s = s.head(r).cwiseInverse();
  const Eigen::MatrixXd reduced = (u.transpose() * ym) * v * inv_s.asDiagonal();

  const Eigen::Map<const Eigen::VectorXd> last(x.data() + x.size() - p.M,
                                               static_cast<Eigen::Index>(p.M));
  Eigen::VectorXd b = u.transpose() * last;
  const Eigen::RowVectorXd lift = u.row(static_cast<Eigen::Index>(p.M) - 1);
  const double limit =
      kDivergenceFactor * max_abs(x.subspan(x.size() - p.K - p.M, p.K + p.M));

  GuardedForecast out;
  out.values.reserve(L);
  for (std::size_t l = 0; l < L; ++l) {
    double next = 0.0;
    if (!out.diverged) {
      b = reduced * b;
      next = lift.dot(b);
      if (!std::isfinite(next) || std::abs(next) > limit) out.diverged = true;
    }
    if (out.diverged) next = l == 0 ? x.back() : out.values.back();
    out.values.push_back(next);
  }
  return out;
}

}  // namespace

ExtensionResult extend(std::span<const double> x, const ExtenderKind& kind, std::size_t L) {
  ExtensionResult out;
  out.samples.assign(x.begin(), x.end());
  if (L == 0 || std::holds_alternative<NoExtension>(kind)) return out;
  out.samples.reserve(x.size() + L);

  if (std::holds_alternative<SymmetricParams>(kind)) {
    if (L >= x.size()) throw ConfigError("symmetric_ext: L must be smaller than the signal length");
    const std::size_t n = x.size();
    for (std::size_t l = 1; l <= L; ++l) out.samples.push_back(x[n - 1 - l]);
    return out;
  }

  GuardedForecast fc;
  if (const auto* p = std::get_if<SigExtParams>(&kind)) {
    const ForecastModel model = fit_sigext(x, p->M, p->K, p->solver);
    const auto training = x.subspan(x.size() - p->K - p->M, p->K + p->M);
    fc = forecast_guarded(model, x.subspan(x.size() - p->M, p->M), L,
                          kDivergenceFactor * max_abs(training));
  } else {
    fc = dmd_forecast(x, std::get<DmdParams>(kind), L);
  }
  out.diverged = fc.diverged;
  out.samples.insert(out.samples.end(), fc.values.begin(), fc.values.end());
  return out;
}

Signal sig_ext(const Signal& x, std::size_t M, std::size_t K, std::size_t L, Solver solver) {
  if (L == 0) {
    check_sizes(x.size(), M, K);
    return x;
  }
  return Signal(extend(x.samples(), SigExtParams{M, K, solver}, L).samples, x.fs());
}

Signal symmetric_ext(const Signal& x, std::size_t L) {
  if (L >= x.size()) throw ConfigError("symmetric_ext: L must be smaller than the signal length");
  return Signal(extend(x.samples(), SymmetricParams{}, L).samples, x.fs());
}

Signal dmd_ext(const Signal& x, std::size_t M, std::size_t K, std::size_t L, std::size_t rank) {
  if (L == 0) {
    check_sizes(x.size(), M, K);
    return x;
  }
  return Signal(extend(x.samples(), DmdParams{M, K, rank}, L).samples, x.fs());
}

}  // namespace boundeff
