#include "boundeff/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "boundeff/error.hpp"

namespace boundeff {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t effective_L(const PipelineConfig& cfg) {
  return std::holds_alternative<NoExtension>(cfg.extender) ? 0 : cfg.L;
}

}  // namespace

void PipelineConfig::validate() const {
  if (hop == 0) throw ConfigError("pipeline: hop must be at least 1");
  if (n_fft < window.length()) throw ConfigError("pipeline: window longer than n_fft");
  if (!std::holds_alternative<NoExtension>(extender) && L < window.half_length()) {
    std::ostringstream msg;
    msg << "pipeline: extension length L=" << L << " must cover the window half length "
        << window.half_length();
    throw ConfigError(msg.str());
  }
}

TfrMatrix restrict_to(const TfrMatrix& tfr_ext, std::size_t N) {
  const std::size_t keep = (N + tfr_ext.hop - 1) / tfr_ext.hop;
  if (keep > tfr_ext.n_time) {
    throw ConfigError("restrict: N exceeds the span of the extended representation");
  }
  TfrMatrix out;
  out.n_freq = tfr_ext.n_freq;
  out.n_time = keep;
  out.hop = tfr_ext.hop;
  out.real_valued = tfr_ext.real_valued;
  out.freq_axis = tfr_ext.freq_axis;
  out.time_axis.assign(tfr_ext.time_axis.begin(),
                       tfr_ext.time_axis.begin() + static_cast<std::ptrdiff_t>(keep));
  out.values.assign(tfr_ext.values.begin(),
                    tfr_ext.values.begin() + static_cast<std::ptrdiff_t>(keep * tfr_ext.n_freq));
  return out;
}

TfrMatrix bound_eff_red(const Signal& x, const PipelineConfig& cfg, bool* diverged) {
  cfg.validate();
  const ExtensionResult ext = extend(x.samples(), cfg.extender, effective_L(cfg));
  if (diverged != nullptr) *diverged = ext.diverged;
  const Signal extended(ext.samples, x.fs());
  return restrict_to(transform(extended, cfg.tfr, cfg.window, cfg.n_fft, cfg.hop), x.size());
}

// ---------------------------------------------------------------------------
// Streaming

StreamState::StreamState(const Signal& x0, PipelineConfig cfg) : cfg_(std::move(cfg)), fs_(x0.fs()) {
  cfg_.validate();
  const std::size_t need = std::max<std::size_t>(1, required_history(cfg_.extender, effective_L(cfg_)));
  if (x0.size() < need) {
    std::ostringstream msg;
    msg << "stream: initial signal has " << x0.size() << " samples, the extender needs " << need;
    throw ConfigError(msg.str());
  }
  const std::size_t half = cfg_.window.half_length();
  const std::size_t reach = time_reach(cfg_.tfr, cfg_.window, cfg_.hop);
  history_ = std::max(need, 2 * half + (2 * reach + 1) * cfg_.hop + 1);

  const auto start = Clock::now();
  tfr_ = bound_eff_red(x0, cfg_, &diverged_);
  column_seconds_ = tfr_.n_time > 0 ? seconds_since(start) / static_cast<double>(tfr_.n_time) : 0.0;
  seen_ = x0.size();
  buffer_.assign(x0.vector().begin(), x0.vector().end());
  trim();
}

std::size_t StreamState::first_dirty_column(std::size_t n) const {
  const std::size_t half = cfg_.window.half_length();
  const std::size_t hop = cfg_.hop;
  std::size_t c = n > half ? (n - half + hop - 1) / hop : 0;
  const std::size_t reach = time_reach(cfg_.tfr, cfg_.window, hop);
  return c > reach ? c - reach : 0;
}

void StreamState::trim() {
  if (buffer_.size() > history_) {
    buffer_.erase(buffer_.begin(),
                  buffer_.begin() + static_cast<std::ptrdiff_t>(buffer_.size() - history_));
  }
}

void StreamState::recompute_from(std::size_t first_column, std::vector<ColumnDelta>* deltas) {
  const std::size_t L = effective_L(cfg_);
  auto start = Clock::now();
  const ExtensionResult ext = extend(buffer_, cfg_.extender, L);
  forecast_seconds_ = seconds_since(start);
  diverged_ = ext.diverged;

  const TfrGrid grid{cfg_.n_fft, cfg_.hop, fs_};
  const std::size_t n_time = grid.columns_for(seen_);
  const TfrMatrix fresh = make_tfr(grid, n_time, is_real_valued(cfg_.tfr));
  tfr_.n_time = n_time;
  tfr_.time_axis = fresh.time_axis;
  tfr_.values.resize(n_time * tfr_.n_freq);

  const std::size_t c0 = std::min(first_column, n_time);
  const SampleView view{ext.samples, seen_ - buffer_.size(), seen_ + L};
  start = Clock::now();
  std::span<Complex> dst(tfr_.values.data() + c0 * tfr_.n_freq, (n_time - c0) * tfr_.n_freq);
  compute_columns(cfg_.tfr, cfg_.window, grid, view, c0, n_time, dst);
  column_seconds_ = n_time > c0 ? seconds_since(start) / static_cast<double>(n_time - c0) : 0.0;

  if (deltas != nullptr) {
    for (std::size_t c = c0; c < n_time; ++c) {
      const auto col = tfr_.column(c);
      deltas->push_back(ColumnDelta{c, {col.begin(), col.end()}});
    }
  }
}

std::vector<ColumnDelta> StreamState::push(std::span<const double> samples) {
  std::vector<ColumnDelta> deltas;
  if (samples.empty()) return deltas;
  require_finite(samples, "stream push");
  const std::size_t first = first_dirty_column(seen_);
  buffer_.insert(buffer_.end(), samples.begin(), samples.end());
  seen_ += samples.size();
  recompute_from(first, &deltas);
  trim();
  return deltas;
}

// ---------------------------------------------------------------------------
// Timing

bool timing_feasible(double t_forecast, double t_col, std::size_t L, std::size_t hop, double fs) {
  if (hop == 0) return false;
  const double columns = static_cast<double>((L + hop - 1) / hop);
  return t_forecast + columns * t_col < static_cast<double>(hop) / fs;
}

TimingBudget timing_budget(double t_forecast, double t_col, std::size_t L, std::size_t hop,
                           double fs, std::size_t max_hop) {
  if (!(fs > 0.0)) throw ConfigError("timing_budget: fs must be positive");
  if (t_forecast < 0.0 || t_col < 0.0) throw ConfigError("timing_budget: negative timing");
  TimingBudget out;
  out.feasible = timing_feasible(t_forecast, t_col, L, hop, fs);
  for (std::size_t h = 1; h <= max_hop; ++h) {
    if (timing_feasible(t_forecast, t_col, L, h, fs)) {
      out.min_hop = h;
      break;
    }
  }
  return out;
}

}  // namespace boundeff
