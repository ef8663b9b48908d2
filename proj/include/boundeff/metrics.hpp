#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "boundeff/numerics.hpp"
#include "boundeff/tfr.hpp"

namespace boundeff {

// (1/L) sum (forecast - truth)^2
double mse_xp(std::span<const double> forecast, std::span<const double> truth);

// Normalized squared magnitudes of one time column.
struct SpectralPdf {
  std::vector<double> prob;
  double bin_width = 1.0;  // Hz
  bool degenerate = false;  // all-zero column; prob is all zero
};

SpectralPdf column_pdf(const TfrMatrix& tfr, std::size_t column);

// 1-D Wasserstein-1 distance: bin_width * sum_k |P(k) - Q(k)| over the
// cumulative sums P, Q.
double ot_distance(const SpectralPdf& p, const SpectralPdf& q);

// Per-column optimal-transport distances between q and reference; entries
// for degenerate reference columns are skipped (reported as negative).
std::vector<double> column_ot_distances(const TfrMatrix& q, const TfrMatrix& reference);

// sum_t d_t(Q, F_opt) / sum_t d_t(F, F_opt), summing over the columns where
// F_opt is non-degenerate. Throws NumericError when F == F_opt on all of them.
double perf_index_D(const TfrMatrix& q, const TfrMatrix& f, const TfrMatrix& f_opt);

}  // namespace boundeff
