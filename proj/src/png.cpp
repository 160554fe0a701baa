#include "nights/png.hpp"

#include <zlib.h>

#include <stdexcept>
#include <vector>

namespace nights {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::string body = std::string(type, 4) + data;
  out += body;
  put_u32(out, static_cast<std::uint32_t>(
                   crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace

std::string encode_solid_png(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("png dimensions must be positive");

  // First row uses the Sub filter (one pixel then zero deltas), the rest use
  // Up (all zeros), so the raw stream is almost entirely zero bytes.
  const std::size_t stride = 1 + 3 * static_cast<std::size_t>(width);
  std::vector<unsigned char> raw(stride * static_cast<std::size_t>(height), 0);
  raw[0] = 1;
  raw[1] = r;
  raw[2] = g;
  raw[3] = b;
  for (int y = 1; y < height; ++y) raw[static_cast<std::size_t>(y) * stride] = 2;

  // Run-length matching is enough for a stream of zeros and far cheaper
  // than a full search.
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15, 8, Z_RLE) != Z_OK) {
    throw std::runtime_error("zlib init failed");
  }
  std::string packed(deflateBound(&zs, static_cast<uLong>(raw.size())), '\0');
  zs.next_in = raw.data();
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = reinterpret_cast<Bytef*>(packed.data());
  zs.avail_out = static_cast<uInt>(packed.size());
  const int rc = deflate(&zs, Z_FINISH);
  const auto packed_size = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("zlib compression failed");
  packed.resize(packed_size);

  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr += std::string{'\x08', '\x02', '\x00', '\x00', '\x00'};  // 8-bit RGB, deflate, no interlace

  std::string out("\x89PNG\r\n\x1a\n", 8);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", "");
  return out;
}

}  // namespace nights
