#include "boundeff/io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "boundeff/error.hpp"

namespace boundeff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size() && std::isfinite(out);
}

bool ends_with_wav(const std::string& path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

Signal read_signal_csv(const std::string& path, std::optional<double> fs_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::optional<double> fs;
  RealVector samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') t = trim(t.substr(1));
    if (t.rfind("fs=", 0) == 0) {
      double v = 0.0;
      if (!parse_double(trim(t.substr(3)), v) || !(v > 0.0)) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": bad sampling rate");
      }
      fs = v;
      continue;
    }
    if (trim(line)[0] == '#') continue;
    double v = 0.0;
    if (!parse_double(t, v)) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": not a number: '" + t + "'");
    }
    samples.push_back(v);
  }
  if (samples.empty()) throw ConfigError("'" + path + "' contains no samples");
  if (fs_override) fs = fs_override;
  if (!fs) throw ConfigError("'" + path + "' has no '# fs=' header; pass a sampling rate");
  return Signal(std::move(samples), *fs);
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_le32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_le16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

Signal read_signal(const std::string& path, std::optional<double> fs_override) {
  if (fs_override && !(*fs_override > 0.0)) throw ConfigError("sampling rate must be positive");
  if (ends_with_wav(path)) {
    Signal x = read_signal_wav(path);
    if (fs_override) return Signal(x.vector(), *fs_override);
    return x;
  }
  return read_signal_csv(path, fs_override);
}

void write_signal_csv(const Signal& x, const std::string& path) {
  auto out = open_out(path, false);
  char buf[64];
  std::snprintf(buf, sizeof buf, "# fs=%.17g\n", x.fs());
  out << buf;
  for (double v : x.samples()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  finish(out, path);
}

void write_signal_wav(const Signal& x, const std::string& path, double full_scale) {
  if (!(full_scale > 0.0)) throw ConfigError("wav: full scale must be positive");
  const double rate = std::round(x.fs());
  if (rate < 1.0 || rate > 4294967295.0) throw ConfigError("wav: sampling rate out of range");
  const auto n = static_cast<std::uint32_t>(x.size());
  auto out = open_out(path, true);
  out.write("RIFF", 4);
  put_le32(out, 36 + 2 * n);
  out.write("WAVEfmt ", 8);
  put_le32(out, 16);
  put_le16(out, 1);  // PCM
  put_le16(out, 1);  // mono
  put_le32(out, static_cast<std::uint32_t>(rate));
  put_le32(out, static_cast<std::uint32_t>(rate) * 2);
  put_le16(out, 2);
  put_le16(out, 16);
  out.write("data", 4);
  put_le32(out, 2 * n);
  for (double v : x.samples()) {
    const double q = std::round(v / full_scale * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    put_le16(out, static_cast<std::uint16_t>(s));
  }
  finish(out, path);
}

Signal read_signal_wav(const std::string& path, double full_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ConfigError("'" + path + "' is not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  std::optional<std::uint32_t> rate;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint16_t format = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = le32(bytes.data() + pos + 4);
    const unsigned char* body = bytes.data() + pos + 8;
    if (pos + 8 + size > bytes.size()) throw ConfigError("'" + path + "': truncated chunk");
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw ConfigError("'" + path + "': short fmt chunk");
      format = le16(body);
      channels = le16(body + 2);
      rate = le32(body + 4);
      bits = le16(body + 14);
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      if (!rate) throw ConfigError("'" + path + "': data chunk before fmt chunk");
      if (format != 1 || bits != 16) throw ConfigError("'" + path + "': only 16-bit PCM is supported");
      if (channels != 1) throw ConfigError("'" + path + "': only mono files are supported");
      if (*rate == 0) throw ConfigError("'" + path + "': zero sampling rate");
      RealVector samples(size / 2);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(le16(body + 2 * i));
        samples[i] = static_cast<double>(s) / 32768.0 * full_scale;
      }
      if (samples.empty()) throw ConfigError("'" + path + "' contains no samples");
      return Signal(std::move(samples), static_cast<double>(*rate));
    }
    pos += 8 + size + (size & 1u);
  }
  throw ConfigError("'" + path + "': no data chunk");
}

void write_tfr_csv(const TfrMatrix& tfr, const std::string& path) {
  auto out = open_out(path, false);
  char buf[64];
  out << "freq_hz\\time_sample";
  for (double t : tfr.time_axis) {
    std::snprintf(buf, sizeof buf, ",%.9g", t);
    out << buf;
  }
  out << '\n';
  for (std::size_t f = 0; f < tfr.n_freq; ++f) {
    std::snprintf(buf, sizeof buf, "%.9g", tfr.freq_axis[f]);
    out << buf;
    for (std::size_t t = 0; t < tfr.n_time; ++t) {
      const double m = std::abs(tfr.at(f, t));
      if (!std::isfinite(m)) throw NumericError("write_tfr_csv: non-finite magnitude");
      std::snprintf(buf, sizeof buf, ",%.9g", m);
      out << buf;
    }
    out << '\n';
  }
  finish(out, path);
}

TfrTable read_tfr_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    return cells;
  };
  auto number = [&path](const std::string& s) {
    double v = 0.0;
    if (!parse_double(s, v)) throw ConfigError("'" + path + "': bad number '" + s + "'");
    return v;
  };
  TfrTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  const auto header = split(line);
  for (std::size_t i = 1; i < header.size(); ++i) table.times.push_back(number(header[i]));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ConfigError("'" + path + "': ragged row");
    table.freqs.push_back(number(cells[0]));
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(number(cells[i]));
    table.magnitude.push_back(std::move(row));
  }
  return table;
}

void write_tfr_pgm(const TfrMatrix& tfr, const std::string& path, double log_floor_db) {
  if (!(log_floor_db < 0.0)) throw ConfigError("pgm: the dB floor must be negative");
  double peak = 0.0;
  for (const auto& v : tfr.values) {
    const double m = std::abs(v);
    if (!std::isfinite(m)) throw NumericError("write_tfr_pgm: non-finite magnitude");
    peak = std::max(peak, m);
  }
  auto out = open_out(path, true);
  out << "P5\n" << tfr.n_time << ' ' << tfr.n_freq << "\n65535\n";
  std::vector<char> row(2 * tfr.n_time);
  for (std::size_t r = 0; r < tfr.n_freq; ++r) {
    const std::size_t f = tfr.n_freq - 1 - r;
    for (std::size_t t = 0; t < tfr.n_time; ++t) {
      std::uint16_t pixel = 0;
      const double m = std::abs(tfr.at(f, t));
      if (peak > 0.0 && m > 0.0) {
        const double db = std::max(20.0 * std::log10(m / peak), log_floor_db);
        pixel = static_cast<std::uint16_t>(std::lround((db - log_floor_db) / -log_floor_db * 65535.0));
      }
      row[2 * t] = static_cast<char>(pixel >> 8);
      row[2 * t + 1] = static_cast<char>(pixel & 0xff);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  finish(out, path);
}

}  // namespace boundeff
