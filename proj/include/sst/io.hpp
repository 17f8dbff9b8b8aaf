#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sst/box3d.hpp"
#include "sst/errors.hpp"
#include "sst/geometry.hpp"
#include "sst/types.hpp"

// Text file formats shared by the sequence reader, the result writer and
// the oracle emitter. All floating-point cells are printed with %.12g so
// identical inputs reproduce byte-identical files.

namespace sst {

// %.12g with NaN normalized to "nan" regardless of sign bit.
std::string fmt_g(double v);

struct Calibration {
  CameraModel camera;
  std::optional<Vec4> plane;  // canonicalized on load
  std::optional<double> depth_scale;
};

// calib.txt: one `key= values` line each for fx, fy, cx, cy, and
// optionally R (9 values row-major), T (3), plane (4), k (1).
Calibration read_calibration(const std::string& path);
void write_calibration(const std::string& path, const CameraModel& cam,
                       const Vec4& plane, double depth_scale);

// detections.csv: header `frame,id,u1,v1,u2,v2,u3,v3,h_px`, vertices
// ordered front-left, front-right, rear-right.
std::vector<BoxDetection> read_detections(const std::string& path);
void write_detections(const std::string& path,
                      const std::vector<BoxDetection>& dets);

struct EgoRecord {
  int frame = 0;
  double vx_kmh = 0;  // lateral, +X
  double vz_kmh = 0;  // longitudinal, +Z
  bool confident = true;
};

struct PlaneRecord {
  int frame = 0;
  Vec4 coeffs = Vec4::Zero();
  bool updated = false;
};

struct VehicleRecord {
  int frame = 0;
  int vehicle_id = 0;
  Vec3 position = Vec3::Zero();  // bottom-face center, meters
  double yaw_deg = 0;
  double vax_kmh = std::numeric_limits<double>::quiet_NaN();
  double vaz_kmh = std::numeric_limits<double>::quiet_NaN();
  bool confident = false;
};

struct StateReport {
  std::vector<EgoRecord> ego;
  std::vector<PlaneRecord> plane;
  std::vector<VehicleRecord> vehicles;
};

struct EgoTruthRow {
  int frame = 0;
  double vx_kmh = 0;
  double vz_kmh = 0;
};

struct VehicleTruthRow {
  int frame = 0;
  int vehicle_id = 0;
  Vec3 position = Vec3::Zero();
  double yaw_deg = 0;
  double vax_kmh = 0;
  double vaz_kmh = 0;
};

struct SequenceTruth {
  std::vector<EgoTruthRow> ego;
  std::vector<VehicleTruthRow> vehicles;
};

// ego.csv `frame,ego_vx_kmh,ego_vz_kmh,confidence`
// plane.csv `frame,a,b,c,d,updated`
// vehicles.csv `frame,id,x,y,z,yaw_deg,vax_kmh,vaz_kmh,confidence`
void write_report(const StateReport& report, const std::string& out_dir);
StateReport read_report(const std::string& dir);

// truth/ego_truth.csv `frame,ego_vx_kmh,ego_vz_kmh`
// truth/vehicles_truth.csv `frame,id,x,y,z,yaw_deg,vax_kmh,vaz_kmh`
void write_truth(const SequenceTruth& truth, const std::string& truth_dir);
SequenceTruth read_truth(const std::string& truth_dir);

}  // namespace sst
