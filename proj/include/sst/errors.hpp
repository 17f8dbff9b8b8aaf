#pragma once

#include <stdexcept>
#include <string>

namespace sst {

// Base class for every recoverable failure raised by the library.
// Callers that want graceful degradation catch Error; everything else
// (logic bugs, allocation failure) propagates as usual.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SST_DEFINE_ERROR(NAME, DEFAULT_MSG)                         \
  class NAME : public Error {                                       \
   public:                                                          \
    explicit NAME(const std::string& msg = DEFAULT_MSG)             \
        : Error(msg) {}                                             \
  };

// Projection / back-projection.
SST_DEFINE_ERROR(PointBehindCamera, "point is at or behind the camera plane")
SST_DEFINE_ERROR(RayParallelToPlane, "pixel ray is parallel to the plane")
SST_DEFINE_ERROR(IntersectionBehindCamera,
                 "ray-plane intersection lies behind the camera")

// Plane construction.
SST_DEFINE_ERROR(ZeroNormal, "plane normal has (near-)zero length")
SST_DEFINE_ERROR(HorizontalNormal,
                 "plane normal has no vertical component; cannot orient")

// Ground-plane estimation.
SST_DEFINE_ERROR(InsufficientRoadPoints,
                 "fewer than 3 road sample points remain after masking")
SST_DEFINE_ERROR(NonFiniteDepth,
                 "fewer than 3 road points carry usable depth")
SST_DEFINE_ERROR(TooFewPoints, "plane fit needs at least 3 points")
SST_DEFINE_ERROR(DegenerateGeometry, "geometry is degenerate for this fit")
SST_DEFINE_ERROR(ZeroInitialOffset,
                 "initial plane offset too small for relative gating")

// Box reconstruction / face selection.
SST_DEFINE_ERROR(NonConvexFootprint, "bottom vertices do not form a box")
SST_DEFINE_ERROR(CameraInsideFootprint,
                 "camera center lies inside the box footprint")
SST_DEFINE_ERROR(EmptyRegion, "face region contains no image pixels")
SST_DEFINE_ERROR(AllPixelsDegenerate,
                 "no face pixel produced a usable flow lift")

// Velocity estimation.
SST_DEFINE_ERROR(EmptyRoi, "ego flow window contains no usable pixels")

// Metrics.
SST_DEFINE_ERROR(EmptyMatchSet, "no matched estimate/truth pairs")

// I/O and configuration.
SST_DEFINE_ERROR(BadMagic, "raster file has a bad magic tag")
SST_DEFINE_ERROR(DimensionMismatch, "raster dimensions are inconsistent")
SST_DEFINE_ERROR(MissingCalibration, "sequence calibration is incomplete")
SST_DEFINE_ERROR(NonContiguousFrameIds, "frame ids must be contiguous")
SST_DEFINE_ERROR(IoError, "file read/write failed")
SST_DEFINE_ERROR(ConfigError, "bad configuration value")
SST_DEFINE_ERROR(InvalidArgument, "argument violates a type invariant")

#undef SST_DEFINE_ERROR

}  // namespace sst
