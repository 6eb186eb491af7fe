#include "nightspec/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "nightspec/errors.hpp"

namespace nightspec {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Line {
  std::string text;
  long long offset;  // byte offset of the line start
};

std::vector<Line> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open: " + path, 0);
  }
  std::vector<Line> lines;
  std::string text;
  long long offset = 0;
  while (std::getline(in, text)) {
    const long long consumed =
        static_cast<long long>(text.size()) + (in.eof() ? 0 : 1);
    if (!text.empty() && text.back() == '\r') {
      text.pop_back();
    }
    lines.push_back({text, offset});
    offset += consumed;
  }
  while (!lines.empty() && lines.back().text.empty()) {
    lines.pop_back();
  }
  return lines;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(s);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(cell);
  }
  if (!s.empty() && s.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

double parse_value(const std::string& cell, const std::string& path,
                   long long offset) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError("unparseable number '" + cell + "' in " + path, offset);
  }
  if (!std::isfinite(v) || v < 0.0) {
    throw FormatError("value out of range in " + path, offset);
  }
  return v;
}

// Shared reader: verifies the header and grid column, returns 48 rows of
// `columns` values each.
std::vector<std::vector<double>> load_table(const std::string& path,
                                            const std::string& header,
                                            std::size_t columns) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0].text != header) {
    throw FormatError("expected header '" + header + "' in " + path,
                      lines.empty() ? 0 : lines[0].offset);
  }
  if (lines.size() != kNumBands + 1) {
    throw FormatError("expected " + std::to_string(kNumBands) +
                          " data rows in " + path + ", found " +
                          std::to_string(lines.size() - 1),
                      lines.back().offset);
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(kNumBands);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    const Line& line = lines[n + 1];
    const auto cells = split_commas(line.text);
    if (cells.size() != columns + 1) {
      throw FormatError("expected " + std::to_string(columns + 1) +
                            " columns in " + path,
                        line.offset);
    }
    const double wl = parse_value(cells[0], path, line.offset);
    if (wl != wavelength(n)) {
      throw FormatError("row " + std::to_string(n + 1) + " of " + path +
                            " must be at " + std::to_string(wavelength(n)) +
                            " nm",
                        line.offset);
    }
    std::vector<double> values;
    values.reserve(columns);
    for (std::size_t c = 0; c < columns; ++c) {
      values.push_back(parse_value(cells[c + 1], path, line.offset));
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

void write_or_throw(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("cannot open for writing: " + path, 0);
  }
  out << body;
  if (!out) {
    throw FormatError("write failed: " + path, 0);
  }
}

}  // namespace

void save_spectrum_csv(const std::string& path, const SpectralCurve& curve) {
  std::string body = "wavelength_nm,value\n";
  for (std::size_t n = 0; n < kNumBands; ++n) {
    body += fmt(wavelength(n)) + "," + fmt(curve[n]) + "\n";
  }
  write_or_throw(path, body);
}

SpectralCurve load_spectrum_csv(const std::string& path) {
  const auto rows = load_table(path, "wavelength_nm,value", 1);
  SpectralCurve curve;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    curve[n] = rows[n][0];
  }
  return curve;
}

void save_bank_csv(const std::string& path, const LedBank& bank) {
  std::string header = "wavelength_nm";
  for (std::size_t k = 0; k < bank.size(); ++k) {
    header += ",base_" + std::to_string(k);
  }
  std::string body = header + "\n";
  for (std::size_t n = 0; n < kNumBands; ++n) {
    body += fmt(wavelength(n));
    for (std::size_t k = 0; k < bank.size(); ++k) {
      body += "," + fmt(bank.base(k)[n]);
    }
    body += "\n";
  }
  write_or_throw(path, body);
}

LedBank load_bank_csv(const std::string& path, const SpectralCurve& scotopic) {
  const auto lines = read_lines(path);
  if (lines.empty()) {
    throw FormatError("empty bank file: " + path, 0);
  }
  const auto head = split_commas(lines[0].text);
  if (head.size() < 2 || head[0] != "wavelength_nm") {
    throw FormatError("expected header 'wavelength_nm,base_0,...' in " + path,
                      lines[0].offset);
  }
  const std::size_t bank_size = head.size() - 1;
  for (std::size_t k = 0; k < bank_size; ++k) {
    if (head[k + 1] != "base_" + std::to_string(k)) {
      throw FormatError("bank columns must be named base_0..base_" +
                            std::to_string(bank_size - 1) + " in " + path,
                        lines[0].offset);
    }
  }
  std::string header = lines[0].text;
  const auto rows = load_table(path, header, bank_size);
  std::vector<SpectralCurve> bases(bank_size);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    for (std::size_t k = 0; k < bank_size; ++k) {
      bases[k][n] = rows[n][k];
    }
  }
  return LedBank(std::move(bases), scotopic);
}

void save_camera_csv(const std::string& path,
                     const CameraSensitivity& camera) {
  std::string body = "wavelength_nm,red,green,blue\n";
  for (std::size_t n = 0; n < kNumBands; ++n) {
    body += fmt(wavelength(n)) + "," + fmt(camera.rows[0][n]) + "," +
            fmt(camera.rows[1][n]) + "," + fmt(camera.rows[2][n]) + "\n";
  }
  write_or_throw(path, body);
}

CameraSensitivity load_camera_csv(const std::string& path) {
  const auto rows = load_table(path, "wavelength_nm,red,green,blue", 3);
  SpectralCurve r, g, b;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    r[n] = rows[n][0];
    g[n] = rows[n][1];
    b[n] = rows[n][2];
  }
  return CameraSensitivity(std::move(r), std::move(g), std::move(b));
}

}  // namespace nightspec
