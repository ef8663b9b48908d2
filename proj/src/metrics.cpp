#include "boundeff/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "boundeff/error.hpp"

namespace boundeff {

double mse_xp(std::span<const double> forecast, std::span<const double> truth) {
  if (forecast.size() != truth.size()) throw ConfigError("mse_xp: length mismatch");
  if (forecast.empty()) throw ConfigError("mse_xp: empty input");
  CompensatedSum acc;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double d = forecast[i] - truth[i];
    acc.add(d * d);
  }
  return acc.value() / static_cast<double>(forecast.size());
}

SpectralPdf column_pdf(const TfrMatrix& tfr, std::size_t column) {
  if (column >= tfr.n_time) throw ConfigError("column_pdf: column out of range");
  SpectralPdf pdf;
  pdf.bin_width = tfr.freq_axis.size() > 1 ? tfr.freq_axis[1] - tfr.freq_axis[0] : 1.0;
  pdf.prob.resize(tfr.n_freq);
  const auto col = tfr.column(column);
  CompensatedSum total;
  for (std::size_t k = 0; k < tfr.n_freq; ++k) {
    pdf.prob[k] = std::norm(col[k]);
    total.add(pdf.prob[k]);
  }
  const double sum = total.value();
  if (!(sum > 0.0)) {
    pdf.degenerate = true;
    std::fill(pdf.prob.begin(), pdf.prob.end(), 0.0);
    return pdf;
  }
  for (double& p : pdf.prob) p /= sum;
  return pdf;
}

double ot_distance(const SpectralPdf& p, const SpectralPdf& q) {
  if (p.prob.size() != q.prob.size() || p.bin_width != q.bin_width) {
    throw ConfigError("ot_distance: pdfs live on different grids");
  }
  double cp = 0.0;
  double cq = 0.0;
  CompensatedSum acc;
  for (std::size_t k = 0; k < p.prob.size(); ++k) {
    cp += p.prob[k];
    cq += q.prob[k];
    acc.add(std::abs(cp - cq));
  }
  return p.bin_width * acc.value();
}

namespace {

void check_same_grid(const TfrMatrix& a, const TfrMatrix& b) {
  if (a.n_freq != b.n_freq || a.n_time != b.n_time) {
    throw ConfigError("performance index: representations differ in shape");
  }
}

}  // namespace

std::vector<double> column_ot_distances(const TfrMatrix& q, const TfrMatrix& reference) {
  check_same_grid(q, reference);
  std::vector<double> d(q.n_time, -1.0);
  for (std::size_t t = 0; t < q.n_time; ++t) {
    const SpectralPdf pr = column_pdf(reference, t);
    if (pr.degenerate) continue;
    d[t] = ot_distance(column_pdf(q, t), pr);
  }
  return d;
}

double perf_index_D(const TfrMatrix& q, const TfrMatrix& f, const TfrMatrix& f_opt) {
  check_same_grid(q, f_opt);
  check_same_grid(f, f_opt);
  const auto dq = column_ot_distances(q, f_opt);
  const auto df = column_ot_distances(f, f_opt);
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t t = 0; t < dq.size(); ++t) {
    if (df[t] < 0.0) continue;
    num.add(dq[t]);
    den.add(df[t]);
  }
  if (!(den.value() > 0.0)) throw NumericError("performance index: no boundary effect to reduce");
  return num.value() / den.value();
}

}  // namespace boundeff
