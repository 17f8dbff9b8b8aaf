#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sst/box3d.hpp"
#include "sst/ground_plane.hpp"
#include "sst/io.hpp"
#include "sst/metrics.hpp"
#include "sst/raster.hpp"
#include "sst/velocity.hpp"

namespace sst {

struct SequenceConfig {
  int width = 1280;
  int height = 800;
  double fps = 30.0;
  CameraModel camera{1000.0, 1000.0, 640.0, 400.0};
  Vec4 initial_plane{0.0, 1.0, 0.0, -1.5};
  DepthScale depth_scale;
  GateThresholds gates;
  RansacParams ransac;
  double d0 = 2.0;
  std::optional<PixelRect> ego_roi;  // default: bottom-center window
  bool correction_enabled = true;
  // 0 disables the re-anchor; see gate_update.
  int max_hold_frames = 0;

  PixelRect roi() const;
  RoadSamplePattern road_pattern() const;
  void validate() const;
};

struct FrameBundle {
  int frame_id = 0;
  DepthRaster depth{1, 1, 1};
  std::optional<FlowRaster> flow;
  std::vector<BoxDetection> detections;
};

// Ordered frame stream; disk-backed or rendered in memory.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int size() const = 0;
  virtual FrameBundle frame(int index) = 0;
};

// Reads the on-disk layout: calib.txt, depth/NNNNNN.msr, flow/NNNNNN.msr
// (flow optional per frame), detections.csv. Frame ids are the raster
// file names and must run 0..N-1.
class SequenceReader : public FrameSource {
 public:
  SequenceReader(const std::string& dir, const SequenceConfig& config);

  int size() const override { return n_frames_; }
  FrameBundle frame(int index) override;

  // Directory calibration merged over the given config: camera always,
  // plane and depth scale when present in calib.txt.
  const SequenceConfig& config() const { return config_; }

 private:
  std::string dir_;
  SequenceConfig config_;
  int n_frames_ = 0;
  std::vector<std::vector<BoxDetection>> per_frame_dets_;
};

// Applies calib.txt of `dir` onto `base` without touching thresholds,
// seeds, or window choices.
SequenceConfig load_sequence_config(const std::string& dir,
                                    const SequenceConfig& base);

// Runs plane correction, box reconstruction and both velocity
// estimators over every frame. Frame-local failures degrade to
// unflagged/held records; the loop never aborts.
StateReport run_sequence(FrameSource& source, const SequenceConfig& config);

}  // namespace sst
