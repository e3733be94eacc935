#include "fisscan/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fisscan/errors.hpp"
#include "fisscan/png_codec.hpp"

namespace fisscan {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// PGM token reader skipping whitespace and # comments.
struct PnmParser {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  int next_int() {
    skip();
    if (pos >= bytes.size()) throw DataError("truncated pnm header");
    int value = 0;
    bool any = false;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) throw DataError("malformed pnm header");
    return value;
  }

  void skip() {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  }
};

}  // namespace

GrayImage read_pgm(const std::string& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2')) {
    throw DataError(path + ": not a P5/P2 pgm file");
  }
  const bool binary = bytes[1] == '5';
  PnmParser parser{bytes, 2};
  GrayImage img;
  img.width = parser.next_int();
  img.height = parser.next_int();
  img.maxval = parser.next_int();
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535) {
    throw DataError(path + ": bad pgm header");
  }
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (binary) {
    ++parser.pos;  // single whitespace after maxval
    const int bytes_per = img.maxval > 255 ? 2 : 1;
    if (bytes.size() - parser.pos < n * bytes_per) {
      throw DataError(path + ": truncated pgm payload");
    }
    const std::uint8_t* p = bytes.data() + parser.pos;
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = bytes_per == 2
                          ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1])
                          : p[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<std::uint16_t>(parser.next_int());
    }
  }
  return img;
}

void write_pgm16(const std::string& path, const GrayImage& image) {
  std::vector<std::uint8_t> out;
  char header[64];
  const int len = std::snprintf(header, sizeof(header), "P5\n%d %d\n%d\n", image.width,
                                image.height, image.maxval);
  out.insert(out.end(), header, header + len);
  const bool wide = image.maxval > 255;
  for (std::uint16_t v : image.pixels) {
    if (wide) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  write_file(path, out);
}

GrayImage read_png(const std::string& path) {
  const png::GrayImage decoded = png::decode_gray(read_file(path));
  GrayImage img;
  img.width = decoded.width;
  img.height = decoded.height;
  img.maxval = decoded.bit_depth == 16 ? 65535 : 255;
  img.pixels = decoded.samples;
  return img;
}

void write_png16(const std::string& path, const GrayImage& image) {
  png::GrayImage out;
  out.width = image.width;
  out.height = image.height;
  out.bit_depth = image.maxval > 255 ? 16 : 8;
  out.samples = image.pixels;
  write_file(path, png::encode_gray(out));
}

GrayImage read_gray_image(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") return read_png(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") return read_pgm(path);
  throw DataError(path + ": unsupported image format (use .pgm or .png)");
}

GrayImage quantize_field(const GrayField& field, ValueMapping& mapping_out) {
  const int T = field.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : field.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mapping_out.offset = lo;
  mapping_out.scale = hi > lo ? hi - lo : 1.0;
  mapping_out.maxval = 65535;
  GrayImage img;
  img.width = T;
  img.height = T;
  img.maxval = mapping_out.maxval;
  img.pixels.resize(field.pixel_count());
  for (std::size_t i = 0; i < field.pixel_count(); ++i) {
    const double unit = (field.values()[i] - mapping_out.offset) / mapping_out.scale;
    img.pixels[i] = static_cast<std::uint16_t>(
        std::lround(std::clamp(unit, 0.0, 1.0) * mapping_out.maxval));
  }
  return img;
}

GrayField field_from_image(const GrayImage& image) {
  if (image.width != image.height) {
    throw DataError("image must be square");
  }
  GrayField field(image.width);
  for (std::size_t i = 0; i < field.pixel_count(); ++i) {
    field.values()[i] = static_cast<double>(image.pixels[i]) / image.maxval;
  }
  return field;
}

void write_field_csv(const std::string& path, const GrayField& field) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const int T = field.size();
  char buf[32];
  for (int row = 1; row <= T; ++row) {
    for (int col = 1; col <= T; ++col) {
      std::snprintf(buf, sizeof(buf), "%.17g", field.at(row, col));
      out << buf;
      out << (col == T ? '\n' : ',');
    }
  }
}

GrayField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const int T = static_cast<int>(rows.size());
  if (T == 0) throw DataError(path + ": empty csv");
  GrayField field(T);
  for (int r = 0; r < T; ++r) {
    if (static_cast<int>(rows[r].size()) != T) {
      throw DataError(path + ": csv is not square");
    }
    for (int c = 0; c < T; ++c) field.at(r + 1, c + 1) = rows[r][c];
  }
  return field;
}

void write_heatmap_csv(const std::string& path, const HeatMap& hm) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  char buf[32];
  for (int row = 1; row <= hm.size; ++row) {
    for (int col = 1; col <= hm.size; ++col) {
      const double v = hm.at(row, col);
      if (std::isfinite(v)) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
      }
      out << (col == hm.size ? '\n' : ',');
    }
  }
}

HeatMapImageInfo write_heatmap_png(const std::string& path, const HeatMap& hm) {
  HeatMapImageInfo info;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : hm.values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  info.min = lo;
  info.max = hi;
  info.missing_value = 0;
  const double scale = hi > lo ? hi - lo : 1.0;
  GrayImage img;
  img.width = hm.size;
  img.height = hm.size;
  img.maxval = 65535;
  img.pixels.resize(hm.values.size(), info.missing_value);
  for (std::size_t i = 0; i < hm.values.size(); ++i) {
    const double v = hm.values[i];
    if (!std::isfinite(v)) continue;
    img.pixels[i] =
        static_cast<std::uint16_t>(std::lround((v - lo) / scale * 65535.0));
  }
  write_png16(path, img);
  return info;
}

void write_mask_pbm(const std::string& path, const BoolMask& mask) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "P1\n" << mask.size << ' ' << mask.size << '\n';
  for (int row = 1; row <= mask.size; ++row) {
    for (int col = 1; col <= mask.size; ++col) {
      out << (mask.at(row, col) ? '1' : '0');
      out << (col == mask.size ? '\n' : ' ');
    }
  }
}

}  // namespace fisscan
