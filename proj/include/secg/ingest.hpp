#pragma once

// Record readers (WFDB format 212, raw little-endian int16, one-sample-per-line
// CSV) and segmentation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "secg/error.hpp"

namespace secg {

enum class RecordFormat { mitdb212, raw_i16, csv };

inline RecordFormat parse_record_format(std::string_view s) {
  if (s == "mitdb212" || s == "212") return RecordFormat::mitdb212;
  if (s == "raw_i16" || s == "i16") return RecordFormat::raw_i16;
  if (s == "csv") return RecordFormat::csv;
  throw ConfigError("unknown record format '" + std::string(s) + "' (expected mitdb212, raw_i16 or csv)");
}

struct Record {
  std::vector<double> samples;  // raw ADC units
  double sample_rate = 360.0;
  int bit_depth = 11;
  std::string source;

  std::size_t size() const noexcept { return samples.size(); }
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'", 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Unpacks 212 bytes: each 3-byte group holds two 12-bit two's complement
/// values, s0 = b0 | (b1 & 0x0F) << 8 and s1 = b2 | (b1 & 0xF0) << 4.
inline std::vector<int> unpack_212(std::span<const std::uint8_t> bytes, std::size_t value_count) {
  if ((value_count + 1) / 2 * 3 > bytes.size())
    throw IngestionError("format 212 data truncated", bytes.size());
  std::vector<int> out(value_count);
  auto sext = [](int v) { return v & 0x800 ? v - 0x1000 : v; };
  for (std::size_t i = 0; i < value_count; ++i) {
    const std::size_t g = (i / 2) * 3;
    const int v = (i % 2 == 0) ? (bytes[g] | ((bytes[g + 1] & 0x0F) << 8))
                               : (bytes[g + 2] | ((bytes[g + 1] & 0xF0) << 4));
    out[i] = sext(v);
  }
  return out;
}

struct WfdbHeader {
  std::string record_name;
  int signal_count = 0;
  double sample_rate = 250.0;
  std::size_t samples_per_signal = 0;  // 0: unknown, infer from file size
  std::string data_file;              // of channel 0
  int format = 0;
  int adc_resolution = 12;
  std::size_t byte_offset = 0;
};

/// Minimal .hea parser: record line, then one line per signal. Comment lines
/// start with '#'.
inline WfdbHeader parse_wfdb_header(const std::string& text) {
  WfdbHeader h;
  std::istringstream lines(text);
  std::string line;
  std::size_t offset = 0;
  int signal_lines = 0;
  bool have_record = false;
  while (std::getline(lines, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    try {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream tok(line);
      if (!have_record) {
        std::string freq;
        tok >> h.record_name >> h.signal_count;
        if (!tok || h.signal_count < 1) throw IngestionError("bad WFDB record line", line_offset);
        h.record_name = h.record_name.substr(0, h.record_name.find('/'));
        if (tok >> freq) {
          h.sample_rate = std::stod(freq.substr(0, freq.find_first_of("/(")));
          std::size_t n = 0;
          if (tok >> n) h.samples_per_signal = n;
        }
        have_record = true;
        continue;
      }
      if (signal_lines++ > 0) continue;  // only channel 0 is used
      std::string file, fmt, gain, resolution;
      tok >> file >> fmt;
      if (!tok) throw IngestionError("bad WFDB signal line", line_offset);
      h.data_file = file;
      const auto plus = fmt.find('+');
      h.format = std::stoi(fmt.substr(0, fmt.find_first_of("x:+")));
      if (plus != std::string::npos) h.byte_offset = std::stoul(fmt.substr(plus + 1));
      if (tok >> gain >> resolution) h.adc_resolution = std::stoi(resolution);
    } catch (const std::logic_error&) {  // stoi / stod
      throw IngestionError("bad number in WFDB header line", line_offset);
    }
  }
  if (!have_record) throw IngestionError("empty WFDB header", 0);
  if (signal_lines < h.signal_count) throw IngestionError("WFDB header lists fewer signals than declared", offset);
  return h;
}

/// Reads channel 0 of a format-212 record. `path` may name the .hea, the .dat
/// or the record base name.
inline Record read_mitdb212(const std::filesystem::path& path) {
  std::filesystem::path base = path;
  if (base.extension() == ".hea" || base.extension() == ".dat") base.replace_extension();
  const auto hea = std::filesystem::path(base.string() + ".hea");
  const auto header_bytes = read_file_bytes(hea);
  if (header_bytes.empty()) throw IngestionError("empty header file '" + hea.string() + "'", 0);
  const WfdbHeader h = parse_wfdb_header(std::string(header_bytes.begin(), header_bytes.end()));
  if (h.format != 212) throw IngestionError("unsupported WFDB format " + std::to_string(h.format), 0);
  const auto dat = hea.parent_path() / h.data_file;
  const auto bytes = read_file_bytes(dat);
  if (bytes.size() <= h.byte_offset) throw IngestionError("empty data file '" + dat.string() + "'", 0);
  const std::span<const std::uint8_t> payload(bytes.data() + h.byte_offset, bytes.size() - h.byte_offset);
  const auto nsig = static_cast<std::size_t>(h.signal_count);
  std::size_t frames = h.samples_per_signal;
  if (frames == 0) frames = payload.size() * 2 / 3 / nsig;
  if (frames == 0) throw IngestionError("no samples in '" + dat.string() + "'", h.byte_offset);
  const auto values = unpack_212(payload, frames * nsig);
  Record r;
  r.sample_rate = h.sample_rate;
  r.bit_depth = h.adc_resolution;
  r.source = h.record_name;
  r.samples.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) r.samples[t] = values[t * nsig];
  return r;
}

inline Record read_raw_i16(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.empty()) throw IngestionError("empty file '" + path.string() + "'", 0);
  if (bytes.size() % 2) throw IngestionError("odd byte count in raw int16 file", bytes.size() - 1);
  Record r;
  r.bit_depth = 16;
  r.source = path.stem().string();
  r.samples.resize(bytes.size() / 2);
  for (std::size_t i = 0; i < r.samples.size(); ++i)
    r.samples[i] = static_cast<std::int16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  return r;
}

/// One number per line; blank lines are skipped. The offset in errors is the
/// byte offset of the bad line.
inline Record read_csv(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string text(bytes.begin(), bytes.end());
  Record r;
  r.bit_depth = 16;
  r.source = path.stem().string();
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty()) {
      double v = 0.0;
      const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
      if (res.ec != std::errc{} || res.ptr != line.data() + line.size() || !std::isfinite(v))
        throw IngestionError("unparseable CSV line '" + std::string(line) + "'", pos);
      r.samples.push_back(v);
    }
    pos = end + 1;
  }
  if (r.samples.empty()) throw IngestionError("no samples in '" + path.string() + "'", 0);
  return r;
}

inline Record read_record(const std::filesystem::path& path, RecordFormat format) {
  switch (format) {
    case RecordFormat::mitdb212: return read_mitdb212(path);
    case RecordFormat::raw_i16: return read_raw_i16(path);
    case RecordFormat::csv: return read_csv(path);
  }
  throw ConfigError("unknown record format");
}

/// Q = ceil(N / n_b) consecutive segments, the last one zero-padded. The true
/// length is the record's size.
inline std::vector<Eigen::VectorXd> segment(std::span<const double> samples, std::size_t n_b) {
  if (n_b < 2) throw ConfigError("n_b must be >= 2");
  std::vector<Eigen::VectorXd> out;
  out.reserve((samples.size() + n_b - 1) / n_b);
  for (std::size_t b = 0; b < samples.size(); b += n_b) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_b));
    const std::size_t len = std::min(n_b, samples.size() - b);
    for (std::size_t i = 0; i < len; ++i) s(static_cast<Eigen::Index>(i)) = samples[b + i];
    out.push_back(std::move(s));
  }
  return out;
}

/// Concatenates segments and crops to `length`.
inline std::vector<double> concatenate(std::span<const Eigen::VectorXd> segments, std::size_t length) {
  std::vector<double> out;
  for (const auto& s : segments) out.insert(out.end(), s.data(), s.data() + s.size());
  if (length > out.size()) throw DimensionError("crop length exceeds concatenated size");
  out.resize(length);
  return out;
}

}  // namespace secg
