#include "fisscan/png_codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "fisscan/errors.hpp"

namespace fisscan::png {

namespace {

std::uint32_t crc32(const std::uint8_t* data, std::size_t size, std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t n = 0; n < 256; ++n) {
      std::uint32_t c = n;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[n] = c;
    }
    return t;
  }();
  crc ^= 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t size) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < size; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_chunk(std::vector<std::uint8_t>& out, const char type[5],
                 const std::vector<std::uint8_t>& payload) {
  put_u32be(out, static_cast<std::uint32_t>(payload.size()));
  std::vector<std::uint8_t> body(type, type + 4);
  body.insert(body.end(), payload.begin(), payload.end());
  out.insert(out.end(), body.begin(), body.end());
  put_u32be(out, crc32(body.data(), body.size()));
}

// Deflate bit writer; huffman codes go in MSB-first, everything else
// LSB-first, both packed into bytes from the least significant bit.
class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put_bits_lsb(std::uint32_t value, int count) {
    for (int i = 0; i < count; ++i) push_bit((value >> i) & 1u);
  }

  void put_code_msb(std::uint32_t code, int count) {
    for (int i = count - 1; i >= 0; --i) push_bit((code >> i) & 1u);
  }

  void align_byte() {
    if (nbits_ > 0) flush_byte();
  }

  void finish() { align_byte(); }

 private:
  void push_bit(std::uint32_t bit) {
    cur_ |= bit << nbits_;
    if (++nbits_ == 8) flush_byte();
  }
  void flush_byte() {
    out_.push_back(static_cast<std::uint8_t>(cur_));
    cur_ = 0;
    nbits_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint32_t cur_ = 0;
  int nbits_ = 0;
};

void fixed_literal_code(int symbol, std::uint32_t& code, int& bits) {
  if (symbol < 144) {
    code = 0x30 + symbol;
    bits = 8;
  } else if (symbol < 256) {
    code = 0x190 + symbol - 144;
    bits = 9;
  } else if (symbol < 280) {
    code = symbol - 256;
    bits = 7;
  } else {
    code = 0xC0 + symbol - 280;
    bits = 8;
  }
}

std::vector<std::uint8_t> zlib_deflate(const std::vector<std::uint8_t>& raw,
                                       Compression mode) {
  std::vector<std::uint8_t> out;
  out.push_back(0x78);  // 32K window, deflate
  out.push_back(0x01);  // no preset dictionary, fastest flevel
  if (mode == Compression::Stored) {
    std::size_t pos = 0;
    do {
      const std::size_t chunk = std::min<std::size_t>(raw.size() - pos, 65535);
      const bool final = pos + chunk == raw.size();
      out.push_back(final ? 1 : 0);  // btype 00, bfinal flag
      const std::uint16_t len = static_cast<std::uint16_t>(chunk);
      out.push_back(static_cast<std::uint8_t>(len & 0xFF));
      out.push_back(static_cast<std::uint8_t>(len >> 8));
      out.push_back(static_cast<std::uint8_t>(~len & 0xFF));
      out.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xFF));
      out.insert(out.end(), raw.begin() + pos, raw.begin() + pos + chunk);
      pos += chunk;
    } while (pos < raw.size());
  } else {
    // Single fixed-huffman block of plain literals.
    BitWriter bw(out);
    bw.put_bits_lsb(1, 1);  // bfinal
    bw.put_bits_lsb(1, 2);  // btype 01
    std::uint32_t code;
    int bits;
    for (std::uint8_t byte : raw) {
      fixed_literal_code(byte, code, bits);
      bw.put_code_msb(code, bits);
    }
    fixed_literal_code(256, code, bits);
    bw.put_code_msb(code, bits);
    bw.finish();
  }
  put_u32be(out, adler32(raw.data(), raw.size()));
  return out;
}

// ---- inflate ----

class BitReader {
 public:
  BitReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t bits(int count) {
    std::uint32_t v = 0;
    for (int i = 0; i < count; ++i) v |= bit() << i;
    return v;
  }

  std::uint32_t bit() {
    if (pos_ >= size_) throw DataError("truncated deflate stream");
    const std::uint32_t b = (data_[pos_] >> nbits_) & 1u;
    if (++nbits_ == 8) {
      nbits_ = 0;
      ++pos_;
    }
    return b;
  }

  void align_byte() {
    if (nbits_ > 0) {
      nbits_ = 0;
      ++pos_;
    }
  }

  const std::uint8_t* byte_ptr() const { return data_ + pos_; }
  std::size_t remaining() const { return size_ - pos_; }
  void skip_bytes(std::size_t n) { pos_ += n; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  int nbits_ = 0;
};

constexpr int kMaxBits = 15;

struct Huffman {
  std::array<int, kMaxBits + 1> count{};  // codes per length
  std::vector<int> symbols;               // length-then-symbol order

  void build(const std::vector<int>& lengths) {
    count.fill(0);
    for (int len : lengths) ++count[len];
    count[0] = 0;
    std::array<int, kMaxBits + 1> offsets{};
    for (int len = 1; len <= kMaxBits; ++len) {
      offsets[len] = offsets[len - 1] + count[len - 1];
    }
    symbols.assign(lengths.size(), 0);
    for (std::size_t sym = 0; sym < lengths.size(); ++sym) {
      if (lengths[sym] != 0) symbols[offsets[lengths[sym]]++] = static_cast<int>(sym);
    }
  }

  int decode(BitReader& br) const {
    int code = 0, first = 0, index = 0;
    for (int len = 1; len <= kMaxBits; ++len) {
      code |= static_cast<int>(br.bit());
      const int n = count[len];
      if (code - first < n) return symbols[index + (code - first)];
      index += n;
      first = (first + n) << 1;
      code <<= 1;
    }
    throw DataError("invalid huffman code in deflate stream");
  }
};

void inflate_block(BitReader& br, const Huffman& lit, const Huffman& dist,
                   std::vector<std::uint8_t>& out) {
  static const int len_base[] = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,
                                 15, 17, 19, 23, 27, 31, 35, 43, 51,  59,
                                 67, 83, 99, 115, 131, 163, 195, 227, 258};
  static const int len_extra[] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                  2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
  static const int dist_base[] = {1,    2,    3,    4,    5,    7,     9,    13,
                                  17,   25,   33,   49,   65,   97,    129,  193,
                                  257,  385,  513,  769,  1025, 1537,  2049, 3073,
                                  4097, 6145, 8193, 12289, 16385, 24577};
  static const int dist_extra[] = {0, 0, 0,  0,  1,  1,  2,  2,  3,  3,
                                   4, 4, 5,  5,  6,  6,  7,  7,  8,  8,
                                   9, 9, 10, 10, 11, 11, 12, 12, 13, 13};
  for (;;) {
    const int sym = lit.decode(br);
    if (sym < 256) {
      out.push_back(static_cast<std::uint8_t>(sym));
    } else if (sym == 256) {
      return;
    } else {
      const int li = sym - 257;
      if (li >= 29) throw DataError("invalid length symbol");
      const int length = len_base[li] + static_cast<int>(br.bits(len_extra[li]));
      const int di = dist.decode(br);
      if (di >= 30) throw DataError("invalid distance symbol");
      const int distance = dist_base[di] + static_cast<int>(br.bits(dist_extra[di]));
      if (static_cast<std::size_t>(distance) > out.size()) {
        throw DataError("deflate back-reference before stream start");
      }
      for (int i = 0; i < length; ++i) out.push_back(out[out.size() - distance]);
    }
  }
}

std::vector<std::uint8_t> inflate(const std::uint8_t* data, std::size_t size) {
  BitReader br(data, size);
  std::vector<std::uint8_t> out;
  for (;;) {
    const bool final = br.bit() != 0;
    const std::uint32_t type = br.bits(2);
    if (type == 0) {
      br.align_byte();
      if (br.remaining() < 4) throw DataError("truncated stored block");
      const std::uint32_t len = br.byte_ptr()[0] | (br.byte_ptr()[1] << 8);
      const std::uint32_t nlen = br.byte_ptr()[2] | (br.byte_ptr()[3] << 8);
      if ((len ^ nlen) != 0xFFFF) throw DataError("stored block length mismatch");
      br.skip_bytes(4);
      if (br.remaining() < len) throw DataError("truncated stored block");
      out.insert(out.end(), br.byte_ptr(), br.byte_ptr() + len);
      br.skip_bytes(len);
    } else if (type == 1) {
      std::vector<int> lit_lengths(288);
      for (int i = 0; i < 144; ++i) lit_lengths[i] = 8;
      for (int i = 144; i < 256; ++i) lit_lengths[i] = 9;
      for (int i = 256; i < 280; ++i) lit_lengths[i] = 7;
      for (int i = 280; i < 288; ++i) lit_lengths[i] = 8;
      Huffman lit, dist;
      lit.build(lit_lengths);
      dist.build(std::vector<int>(30, 5));
      inflate_block(br, lit, dist, out);
    } else if (type == 2) {
      const int hlit = static_cast<int>(br.bits(5)) + 257;
      const int hdist = static_cast<int>(br.bits(5)) + 1;
      const int hclen = static_cast<int>(br.bits(4)) + 4;
      static const int order[19] = {16, 17, 18, 0, 8,  7, 9,  6, 10, 5,
                                    11, 4,  12, 3, 13, 2, 14, 1, 15};
      std::vector<int> cl_lengths(19, 0);
      for (int i = 0; i < hclen; ++i) cl_lengths[order[i]] = static_cast<int>(br.bits(3));
      Huffman cl;
      cl.build(cl_lengths);
      std::vector<int> lengths;
      lengths.reserve(hlit + hdist);
      while (static_cast<int>(lengths.size()) < hlit + hdist) {
        const int sym = cl.decode(br);
        if (sym < 16) {
          lengths.push_back(sym);
        } else if (sym == 16) {
          if (lengths.empty()) throw DataError("repeat with no previous length");
          const int repeat = 3 + static_cast<int>(br.bits(2));
          lengths.insert(lengths.end(), repeat, lengths.back());
        } else if (sym == 17) {
          lengths.insert(lengths.end(), 3 + br.bits(3), 0);
        } else {
          lengths.insert(lengths.end(), 11 + br.bits(7), 0);
        }
      }
      if (static_cast<int>(lengths.size()) != hlit + hdist) {
        throw DataError("code length overflow in dynamic block");
      }
      Huffman lit, dist;
      lit.build(std::vector<int>(lengths.begin(), lengths.begin() + hlit));
      dist.build(std::vector<int>(lengths.begin() + hlit, lengths.end()));
      inflate_block(br, lit, dist, out);
    } else {
      throw DataError("reserved deflate block type");
    }
    if (final) break;
  }
  return out;
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data, std::size_t size) {
  if (size < 6) throw DataError("zlib stream too short");
  if ((data[0] & 0x0F) != 8) throw DataError("not a deflate zlib stream");
  if (((data[0] << 8) | data[1]) % 31 != 0) throw DataError("bad zlib header check");
  if (data[1] & 0x20) throw DataError("preset dictionaries unsupported");
  std::vector<std::uint8_t> raw = inflate(data + 2, size - 2 - 4);
  // The adler checksum trails the stream; bit readers may stop short of it,
  // so it is validated against the produced bytes instead of the tail offset.
  const std::uint8_t* tail = data + size - 4;
  const std::uint32_t expect = (static_cast<std::uint32_t>(tail[0]) << 24) |
                               (static_cast<std::uint32_t>(tail[1]) << 16) |
                               (static_cast<std::uint32_t>(tail[2]) << 8) |
                               static_cast<std::uint32_t>(tail[3]);
  if (adler32(raw.data(), raw.size()) != expect) {
    throw DataError("zlib checksum mismatch");
  }
  return raw;
}

std::vector<std::uint8_t> encode_gray(const GrayImage& image, Compression mode) {
  if (image.width <= 0 || image.height <= 0) throw DataError("empty image");
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw DataError("png encoder supports 8- or 16-bit grayscale only");
  }
  const int bytes_per_sample = image.bit_depth / 8;
  const std::size_t stride =
      static_cast<std::size_t>(image.width) * bytes_per_sample;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * image.height);
  for (int row = 0; row < image.height; ++row) {
    raw.push_back(0);  // filter: none
    for (int col = 0; col < image.width; ++col) {
      const std::uint16_t v =
          image.samples[static_cast<std::size_t>(row) * image.width + col];
      if (bytes_per_sample == 2) {
        raw.push_back(static_cast<std::uint8_t>(v >> 8));
        raw.push_back(static_cast<std::uint8_t>(v & 0xFF));
      } else {
        raw.push_back(static_cast<std::uint8_t>(v & 0xFF));
      }
    }
  }

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  std::vector<std::uint8_t> ihdr;
  put_u32be(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32be(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr.push_back(static_cast<std::uint8_t>(image.bit_depth));
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // adaptive filters
  ihdr.push_back(0);  // no interlace
  write_chunk(out, "IHDR", ihdr);
  write_chunk(out, "IDAT", zlib_deflate(raw, mode));
  write_chunk(out, "IEND", {});
  return out;
}

GrayImage decode_gray(const std::vector<std::uint8_t>& bytes) {
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0) {
    throw DataError("not a png file");
  }
  GrayImage image;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool saw_ihdr = false;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = (static_cast<std::uint32_t>(bytes[pos]) << 24) |
                              (static_cast<std::uint32_t>(bytes[pos + 1]) << 16) |
                              (static_cast<std::uint32_t>(bytes[pos + 2]) << 8) |
                              bytes[pos + 3];
    const std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
    if (pos + 12 + len > bytes.size()) throw DataError("truncated png chunk");
    const std::uint8_t* payload = bytes.data() + pos + 8;
    if (type == "IHDR") {
      saw_ihdr = true;
      image.width = static_cast<int>((payload[0] << 24) | (payload[1] << 16) |
                                     (payload[2] << 8) | payload[3]);
      image.height = static_cast<int>((payload[4] << 24) | (payload[5] << 16) |
                                      (payload[6] << 8) | payload[7]);
      image.bit_depth = payload[8];
      const int color_type = payload[9];
      const int interlace = payload[12];
      if (color_type != 0) throw DataError("png must be grayscale (color type 0)");
      if (image.bit_depth != 8 && image.bit_depth != 16) {
        throw DataError("png must have bit depth 8 or 16");
      }
      if (interlace != 0) throw DataError("interlaced png unsupported");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), payload, payload + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr) throw DataError("png missing IHDR");
  if (image.width <= 0 || image.height <= 0) throw DataError("bad png dimensions");

  const std::vector<std::uint8_t> raw = zlib_inflate(idat.data(), idat.size());
  const int bpp = image.bit_depth / 8;
  const std::size_t stride = static_cast<std::size_t>(image.width) * bpp;
  if (raw.size() != (stride + 1) * image.height) {
    throw DataError("png payload has unexpected size");
  }

  std::vector<std::uint8_t> cur(stride, 0);
  std::vector<std::uint8_t> prev(stride, 0);
  image.samples.resize(static_cast<std::size_t>(image.width) * image.height);
  for (int row = 0; row < image.height; ++row) {
    const std::uint8_t* in = raw.data() + static_cast<std::size_t>(row) * (stride + 1);
    const int filter = in[0];
    for (std::size_t i = 0; i < stride; ++i) {
      const int x = in[1 + i];
      const int a = i >= static_cast<std::size_t>(bpp) ? cur[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= static_cast<std::size_t>(bpp) ? prev[i - bpp] : 0;
      int v;
      switch (filter) {
        case 0: v = x; break;
        case 1: v = x + a; break;
        case 2: v = x + b; break;
        case 3: v = x + (a + b) / 2; break;
        case 4: v = x + paeth(a, b, c); break;
        default: throw DataError("unknown png filter");
      }
      cur[i] = static_cast<std::uint8_t>(v & 0xFF);
    }
    for (int col = 0; col < image.width; ++col) {
      const std::uint16_t v =
          bpp == 2 ? static_cast<std::uint16_t>((cur[2 * col] << 8) | cur[2 * col + 1])
                   : cur[col];
      image.samples[static_cast<std::size_t>(row) * image.width + col] = v;
    }
    std::swap(cur, prev);
  }
  return image;
}

}  // namespace fisscan::png
