#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "boundeff/extend.hpp"
#include "boundeff/signal.hpp"
#include "boundeff/tfr.hpp"

namespace boundeff {

struct PipelineConfig {
  ExtenderKind extender = NoExtension{};
  TfrKind tfr = StftKind{};
  WindowSpec window = WindowSpec::gaussian(32);
  std::size_t n_fft = 128;
  std::size_t hop = 1;
  std::size_t L = 0;  // extension length in samples

  // Throws ConfigError unless L >= window half length (or the extender is
  // NoExtension) and the transform geometry is valid.
  void validate() const;
};

// Keeps the columns whose time index lies below N samples.
TfrMatrix restrict_to(const TfrMatrix& tfr_ext, std::size_t N);

// Extend, transform, restrict. With NoExtension (or L = 0) this is the plain
// transform of x.
TfrMatrix bound_eff_red(const Signal& x, const PipelineConfig& cfg, bool* diverged = nullptr);

struct ColumnDelta {
  std::size_t index = 0;
  std::vector<Complex> values;
};

// Incremental form of bound_eff_red. Each push refits the extender on the
// retained history and recomputes only the trailing columns whose inputs
// changed; the matrix always equals bound_eff_red on everything seen so far.
class StreamState {
 public:
  StreamState(const Signal& x0, PipelineConfig cfg);

  std::vector<ColumnDelta> push(std::span<const double> samples);

  const TfrMatrix& tfr() const { return tfr_; }
  const PipelineConfig& config() const { return cfg_; }
  std::size_t samples_seen() const { return seen_; }
  std::size_t buffer_size() const { return buffer_.size(); }
  // Smallest history that must be retained between pushes.
  std::size_t min_history() const { return history_; }
  bool last_forecast_diverged() const { return diverged_; }

  // Seconds spent in the last push on forecasting and per recomputed column.
  double last_forecast_seconds() const { return forecast_seconds_; }
  double last_column_seconds() const { return column_seconds_; }

 private:
  // First column that depends on samples at or beyond index n.
  std::size_t first_dirty_column(std::size_t n) const;
  void recompute_from(std::size_t first_column, std::vector<ColumnDelta>* deltas);
  void trim();

  PipelineConfig cfg_;
  double fs_ = 1.0;
  std::vector<double> buffer_;  // samples [seen_ - buffer_.size(), seen_)
  std::size_t seen_ = 0;
  std::size_t history_ = 0;
  TfrMatrix tfr_;
  bool diverged_ = false;
  double forecast_seconds_ = 0.0;
  double column_seconds_ = 0.0;
};

struct TimingBudget {
  bool feasible = false;             // for the queried hop
  std::optional<std::size_t> min_hop;  // smallest feasible hop up to the scan limit
};

// Real-time condition t_forecast + ceil(L/H) t_col < H / fs.
bool timing_feasible(double t_forecast, double t_col, std::size_t L, std::size_t hop, double fs);

TimingBudget timing_budget(double t_forecast, double t_col, std::size_t L, std::size_t hop,
                           double fs, std::size_t max_hop = 1 << 20);

}  // namespace boundeff
