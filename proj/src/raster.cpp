#include "sst/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace sst {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'R', '1'};
constexpr uint64_t kMaxPixels = 1ull << 28;  // 256M values: ample, bounds allocation

uint32_t read_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void write_u32le(uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xff);
  p[1] = static_cast<unsigned char>((v >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((v >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((v >> 24) & 0xff);
}

}  // namespace

Raster::Raster(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw InvalidArgument("raster dimensions must be positive");
  }
  const uint64_t count = static_cast<uint64_t>(width) * height * channels;
  if (count > kMaxPixels) throw InvalidArgument("raster too large");
  data_.assign(count, 0.0f);
}

double Raster::sample(double u, double v, int c) const {
  const double cu = std::clamp(u, 0.0, static_cast<double>(width_ - 1));
  const double cv = std::clamp(v, 0.0, static_cast<double>(height_ - 1));
  const int x0 = static_cast<int>(std::floor(cu));
  const int y0 = static_cast<int>(std::floor(cv));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = cu - x0;
  const double fy = cv - y0;
  // Zero-weight neighbors are skipped so NaN marker values next to a
  // queried integer position cannot poison the result.
  const auto lerp = [](double a, double b, double t) {
    return t == 0.0 ? a : (1.0 - t) * a + t * b;
  };
  const double top = lerp(at(x0, y0, c), at(x1, y0, c), fx);
  if (fy == 0.0) return top;
  const double bot = lerp(at(x0, y1, c), at(x1, y1, c), fx);
  return lerp(top, bot, fy);
}

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster file: " + path.string());

  std::array<unsigned char, 16> header;
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (!in) throw IoError("raster header truncated: " + path.string());
  if (std::memcmp(header.data(), kMagic, 4) != 0) {
    throw BadMagic("not an MSR1 raster: " + path.string());
  }
  const uint32_t w = read_u32le(header.data() + 4);
  const uint32_t h = read_u32le(header.data() + 8);
  const uint32_t c = read_u32le(header.data() + 12);
  if (w == 0 || h == 0 || c == 0 ||
      static_cast<uint64_t>(w) * h * c > kMaxPixels) {
    throw DimensionMismatch("bad raster dimensions in " + path.string());
  }

  Raster raster(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  const std::streamsize bytes =
      static_cast<std::streamsize>(raster.data().size() * sizeof(float));
  in.read(reinterpret_cast<char*>(raster.data().data()), bytes);
  if (in.gcount() != bytes) {
    throw DimensionMismatch("raster payload truncated: " + path.string());
  }
  // Trailing bytes mean the header lied about the size.
  in.peek();
  if (!in.eof()) {
    throw DimensionMismatch("raster payload oversized: " + path.string());
  }
  return raster;
}

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create raster file: " + path.string());

  std::array<unsigned char, 16> header;
  std::memcpy(header.data(), kMagic, 4);
  write_u32le(static_cast<uint32_t>(raster.width()), header.data() + 4);
  write_u32le(static_cast<uint32_t>(raster.height()), header.data() + 8);
  write_u32le(static_cast<uint32_t>(raster.channels()), header.data() + 12);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  // float32 payload is written verbatim; this targets little-endian hosts.
  out.write(reinterpret_cast<const char*>(raster.data().data()),
            static_cast<std::streamsize>(raster.data().size() * sizeof(float)));
  if (!out) throw IoError("raster write failed: " + path.string());
}

}  // namespace sst
