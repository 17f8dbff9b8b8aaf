#pragma once

#include <cassert>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sst/errors.hpp"

namespace sst {

// Dense float image with interleaved channels, row-major storage.
// Depth rasters carry one channel of normalized planar depth (0 marks
// "no surface"); flow rasters carry two channels (du, dv) in pixels.
class Raster {
 public:
  Raster(int width, int height, int channels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  float at(int x, int y, int c = 0) const {
    assert(contains(x, y) && c >= 0 && c < channels_);
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  float& at(int x, int y, int c = 0) {
    assert(contains(x, y) && c >= 0 && c < channels_);
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  // Bilinear interpolation at a continuous position, clamped to the
  // image border.  Integer positions return the stored value exactly.
  double sample(double u, double v, int c = 0) const;

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<float> data_;
};

using DepthRaster = Raster;
using FlowRaster = Raster;

// Binary raster container: magic "MSR1", three little-endian uint32
// fields (width, height, channels), then width*height*channels float32
// values in row-major interleaved order.
Raster read_raster(const std::filesystem::path& path);
void write_raster(const Raster& raster, const std::filesystem::path& path);

}  // namespace sst
