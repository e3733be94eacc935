#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fisscan::png {

// Grayscale image with 8- or 16-bit samples, rows top to bottom.
struct GrayImage {
  int width = 0;
  int height = 0;
  int bit_depth = 16;  // 8 or 16
  std::vector<std::uint16_t> samples;
};

enum class Compression { Stored, FixedHuffman };

// Non-interlaced grayscale PNG (color type 0).
std::vector<std::uint8_t> encode_gray(const GrayImage& image,
                                      Compression mode = Compression::FixedHuffman);
GrayImage decode_gray(const std::vector<std::uint8_t>& bytes);

// Raw zlib streams, exposed for testing the inflate path.
std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data, std::size_t size);

}  // namespace fisscan::png
