#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fisscan/field.hpp"
#include "fisscan/stats.hpp"

namespace fisscan {

// Raw grayscale image as read from disk.
struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 65535;
  std::vector<std::uint16_t> pixels;  // row-major
};

// Affine mapping applied when quantizing a real-valued field to 16 bits:
// stored = round((value - offset) / scale * maxval).
struct ValueMapping {
  double offset = 0.0;
  double scale = 1.0;
  int maxval = 65535;
};

// Binary PGM (P5); ASCII P2 is accepted on read.
GrayImage read_pgm(const std::string& path);
void write_pgm16(const std::string& path, const GrayImage& image);

// PNG, grayscale 8/16-bit only.
GrayImage read_png(const std::string& path);
void write_png16(const std::string& path, const GrayImage& image);

// Dispatch on file suffix (.pgm / .png).
GrayImage read_gray_image(const std::string& path);

// Field quantization round trip. Quantizing picks offset = min value and
// scale = value range (1 if constant).
GrayImage quantize_field(const GrayField& field, ValueMapping& mapping_out);
GrayField field_from_image(const GrayImage& image);  // value / maxval

// Raw CSV: T rows of T comma-separated values, full double precision.
void write_field_csv(const std::string& path, const GrayField& field);
GrayField read_field_csv(const std::string& path);

// Heat map CSV: missing values serialize as empty cells.
void write_heatmap_csv(const std::string& path, const HeatMap& hm);

// Heat map as 16-bit PNG; finite values map linearly onto [0, 65535], missing
// anchors encode as 0. Returns the value range used.
struct HeatMapImageInfo {
  double min = 0.0;
  double max = 0.0;
  std::uint16_t missing_value = 0;
};
HeatMapImageInfo write_heatmap_png(const std::string& path, const HeatMap& hm);

// Portable bitmap (P1) of the significance mask.
void write_mask_pbm(const std::string& path, const BoolMask& mask);

}  // namespace fisscan
