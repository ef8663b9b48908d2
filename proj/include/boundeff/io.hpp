#pragma once

#include <optional>
#include <string>
#include <vector>

#include "boundeff/signal.hpp"
#include "boundeff/tfr.hpp"

namespace boundeff {

// Format is chosen by extension: ".wav" is 16-bit PCM mono, anything else is
// CSV with one sample per line and an optional "# fs=<Hz>" comment. The
// override wins over the file's own rate. Errors are ConfigError.
Signal read_signal(const std::string& path, std::optional<double> fs_override = std::nullopt);

void write_signal_csv(const Signal& x, const std::string& path);

// Samples are divided by full_scale, clipped to [-1, 1) and stored as
// round(32768 v). Reading maps back with the same scale.
void write_signal_wav(const Signal& x, const std::string& path, double full_scale = 1.0);
Signal read_signal_wav(const std::string& path, double full_scale = 1.0);

// Header row holds the time axis (samples), first column the frequency axis
// (Hz); cells are magnitudes with 9 significant digits.
void write_tfr_csv(const TfrMatrix& tfr, const std::string& path);

struct TfrTable {
  std::vector<double> times;
  std::vector<double> freqs;
  std::vector<std::vector<double>> magnitude;  // [freq][time]
};

TfrTable read_tfr_csv(const std::string& path);

// Binary P5, 16-bit big-endian. Pixel = 65535 (dB - floor) / -floor with
// dB = 20 log10(|v| / max |v|) clamped at floor; highest frequency on top.
void write_tfr_pgm(const TfrMatrix& tfr, const std::string& path, double log_floor_db = -80.0);

}  // namespace boundeff
