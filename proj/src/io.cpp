#include "sst/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sst {

std::string fmt_g(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_numbers(const std::string& text,
                                  const std::string& path,
                                  const std::string& key) {
  std::istringstream in(text);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  std::string rest;
  if (in.clear(), in >> rest) {
    throw IoError("bad value for '" + key + "' in " + path);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& cell, const std::string& path) {
  try {
    size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad numeric cell '" + cell + "' in " + path);
  }
}

int parse_int(const std::string& cell, const std::string& path) {
  try {
    size_t used = 0;
    const int v = std::stoi(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw IoError("bad integer cell '" + cell + "' in " + path);
  }
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream create_text(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  return out;
}

void expect_header(std::ifstream& in, const std::string& expected,
                   const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != expected) {
    throw IoError("expected header '" + expected + "' in " + path);
  }
}

}  // namespace

Calibration read_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingCalibration("cannot open " + path);

  std::map<std::string, std::vector<double>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw IoError("expected 'key= values' line in " + path + ": " + t);
    }
    const std::string key = trim(t.substr(0, eq));
    entries[key] = parse_numbers(t.substr(eq + 1), path, key);
  }

  const auto scalar = [&](const std::string& key) {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      throw MissingCalibration("missing '" + key + "=' in " + path);
    }
    if (it->second.size() != 1) {
      throw IoError("'" + key + "=' takes one value in " + path);
    }
    return it->second[0];
  };
  const auto fixed = [&](const std::string& key, size_t n,
                         std::vector<double>& out) {
    const auto it = entries.find(key);
    if (it == entries.end()) return false;
    if (it->second.size() != n) {
      throw IoError("'" + key + "=' takes " + std::to_string(n) +
                    " values in " + path);
    }
    out = it->second;
    return true;
  };

  Calibration calib;
  calib.camera.fx = scalar("fx");
  calib.camera.fy = scalar("fy");
  calib.camera.cx = scalar("cx");
  calib.camera.cy = scalar("cy");

  std::vector<double> v;
  if (fixed("R", 9, v)) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) calib.camera.rotation(r, c) = v[3 * r + c];
  }
  if (fixed("T", 3, v)) calib.camera.translation = Vec3(v[0], v[1], v[2]);
  calib.camera.validate();

  if (fixed("plane", 4, v)) {
    calib.plane = canonicalize_plane(Vec4(v[0], v[1], v[2], v[3])).coeffs();
  }
  if (fixed("k", 1, v)) {
    if (!(v[0] > 0.0)) throw IoError("'k=' must be positive in " + path);
    calib.depth_scale = v[0];
  }
  return calib;
}

void write_calibration(const std::string& path, const CameraModel& cam,
                       const Vec4& plane, double depth_scale) {
  std::ofstream out = create_text(path);
  out << "fx= " << fmt_g(cam.fx) << "\n";
  out << "fy= " << fmt_g(cam.fy) << "\n";
  out << "cx= " << fmt_g(cam.cx) << "\n";
  out << "cy= " << fmt_g(cam.cy) << "\n";
  out << "R=";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << " " << fmt_g(cam.rotation(r, c));
  out << "\n";
  out << "T= " << fmt_g(cam.translation.x()) << " "
      << fmt_g(cam.translation.y()) << " " << fmt_g(cam.translation.z())
      << "\n";
  out << "plane= " << fmt_g(plane[0]) << " " << fmt_g(plane[1]) << " "
      << fmt_g(plane[2]) << " " << fmt_g(plane[3]) << "\n";
  out << "k= " << fmt_g(depth_scale) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<BoxDetection> read_detections(const std::string& path) {
  std::ifstream in = open_text(path);
  expect_header(in, "frame,id,u1,v1,u2,v2,u3,v3,h_px", path);
  std::vector<BoxDetection> dets;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 9) throw IoError("expected 9 cells in " + path);
    BoxDetection d;
    d.frame_id = parse_int(cells[0], path);
    d.vehicle_id = parse_int(cells[1], path);
    d.b1 = Pixel(parse_double(cells[2], path), parse_double(cells[3], path));
    d.b2 = Pixel(parse_double(cells[4], path), parse_double(cells[5], path));
    d.b3 = Pixel(parse_double(cells[6], path), parse_double(cells[7], path));
    d.h_px = parse_double(cells[8], path);
    dets.push_back(d);
  }
  return dets;
}

void write_detections(const std::string& path,
                      const std::vector<BoxDetection>& dets) {
  std::ofstream out = create_text(path);
  out << "frame,id,u1,v1,u2,v2,u3,v3,h_px\n";
  for (const BoxDetection& d : dets) {
    out << d.frame_id << "," << d.vehicle_id << "," << fmt_g(d.b1.x()) << ","
        << fmt_g(d.b1.y()) << "," << fmt_g(d.b2.x()) << "," << fmt_g(d.b2.y())
        << "," << fmt_g(d.b3.x()) << "," << fmt_g(d.b3.y()) << ","
        << fmt_g(d.h_px) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_report(const StateReport& report, const std::string& out_dir) {
  {
    std::ofstream out = create_text(out_dir + "/ego.csv");
    out << "frame,ego_vx_kmh,ego_vz_kmh,confidence\n";
    for (const EgoRecord& r : report.ego) {
      out << r.frame << "," << fmt_g(r.vx_kmh) << "," << fmt_g(r.vz_kmh)
          << "," << (r.confident ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed: " + out_dir + "/ego.csv");
  }
  {
    std::ofstream out = create_text(out_dir + "/plane.csv");
    out << "frame,a,b,c,d,updated\n";
    for (const PlaneRecord& r : report.plane) {
      out << r.frame << "," << fmt_g(r.coeffs[0]) << "," << fmt_g(r.coeffs[1])
          << "," << fmt_g(r.coeffs[2]) << "," << fmt_g(r.coeffs[3]) << ","
          << (r.updated ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed: " + out_dir + "/plane.csv");
  }
  {
    std::ofstream out = create_text(out_dir + "/vehicles.csv");
    out << "frame,id,x,y,z,yaw_deg,vax_kmh,vaz_kmh,confidence\n";
    for (const VehicleRecord& r : report.vehicles) {
      out << r.frame << "," << r.vehicle_id << "," << fmt_g(r.position.x())
          << "," << fmt_g(r.position.y()) << "," << fmt_g(r.position.z())
          << "," << fmt_g(r.yaw_deg) << "," << fmt_g(r.vax_kmh) << ","
          << fmt_g(r.vaz_kmh) << "," << (r.confident ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed: " + out_dir + "/vehicles.csv");
  }
}

StateReport read_report(const std::string& dir) {
  StateReport report;
  {
    std::ifstream in = open_text(dir + "/ego.csv");
    expect_header(in, "frame,ego_vx_kmh,ego_vz_kmh,confidence",
                  dir + "/ego.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto c = split_csv(line);
      if (c.size() != 4) throw IoError("expected 4 cells in " + dir);
      EgoRecord r;
      r.frame = parse_int(c[0], dir);
      r.vx_kmh = parse_double(c[1], dir);
      r.vz_kmh = parse_double(c[2], dir);
      r.confident = parse_int(c[3], dir) != 0;
      report.ego.push_back(r);
    }
  }
  {
    std::ifstream in = open_text(dir + "/plane.csv");
    expect_header(in, "frame,a,b,c,d,updated", dir + "/plane.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto c = split_csv(line);
      if (c.size() != 6) throw IoError("expected 6 cells in " + dir);
      PlaneRecord r;
      r.frame = parse_int(c[0], dir);
      for (int i = 0; i < 4; ++i) r.coeffs[i] = parse_double(c[1 + i], dir);
      r.updated = parse_int(c[5], dir) != 0;
      report.plane.push_back(r);
    }
  }
  {
    std::ifstream in = open_text(dir + "/vehicles.csv");
    expect_header(in, "frame,id,x,y,z,yaw_deg,vax_kmh,vaz_kmh,confidence",
                  dir + "/vehicles.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto c = split_csv(line);
      if (c.size() != 9) throw IoError("expected 9 cells in " + dir);
      VehicleRecord r;
      r.frame = parse_int(c[0], dir);
      r.vehicle_id = parse_int(c[1], dir);
      r.position = Vec3(parse_double(c[2], dir), parse_double(c[3], dir),
                        parse_double(c[4], dir));
      r.yaw_deg = parse_double(c[5], dir);
      r.vax_kmh = parse_double(c[6], dir);
      r.vaz_kmh = parse_double(c[7], dir);
      r.confident = parse_int(c[8], dir) != 0;
      report.vehicles.push_back(r);
    }
  }
  return report;
}

void write_truth(const SequenceTruth& truth, const std::string& truth_dir) {
  {
    std::ofstream out = create_text(truth_dir + "/ego_truth.csv");
    out << "frame,ego_vx_kmh,ego_vz_kmh\n";
    for (const EgoTruthRow& r : truth.ego) {
      out << r.frame << "," << fmt_g(r.vx_kmh) << "," << fmt_g(r.vz_kmh)
          << "\n";
    }
    if (!out) throw IoError("write failed: " + truth_dir + "/ego_truth.csv");
  }
  {
    std::ofstream out = create_text(truth_dir + "/vehicles_truth.csv");
    out << "frame,id,x,y,z,yaw_deg,vax_kmh,vaz_kmh\n";
    for (const VehicleTruthRow& r : truth.vehicles) {
      out << r.frame << "," << r.vehicle_id << "," << fmt_g(r.position.x())
          << "," << fmt_g(r.position.y()) << "," << fmt_g(r.position.z())
          << "," << fmt_g(r.yaw_deg) << "," << fmt_g(r.vax_kmh) << ","
          << fmt_g(r.vaz_kmh) << "\n";
    }
    if (!out) {
      throw IoError("write failed: " + truth_dir + "/vehicles_truth.csv");
    }
  }
}

SequenceTruth read_truth(const std::string& truth_dir) {
  SequenceTruth truth;
  {
    std::ifstream in = open_text(truth_dir + "/ego_truth.csv");
    expect_header(in, "frame,ego_vx_kmh,ego_vz_kmh",
                  truth_dir + "/ego_truth.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto c = split_csv(line);
      if (c.size() != 3) throw IoError("expected 3 cells in " + truth_dir);
      EgoTruthRow r;
      r.frame = parse_int(c[0], truth_dir);
      r.vx_kmh = parse_double(c[1], truth_dir);
      r.vz_kmh = parse_double(c[2], truth_dir);
      truth.ego.push_back(r);
    }
  }
  {
    std::ifstream in = open_text(truth_dir + "/vehicles_truth.csv");
    expect_header(in, "frame,id,x,y,z,yaw_deg,vax_kmh,vaz_kmh",
                  truth_dir + "/vehicles_truth.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto c = split_csv(line);
      if (c.size() != 8) throw IoError("expected 8 cells in " + truth_dir);
      VehicleTruthRow r;
      r.frame = parse_int(c[0], truth_dir);
      r.vehicle_id = parse_int(c[1], truth_dir);
      r.position = Vec3(parse_double(c[2], truth_dir),
                        parse_double(c[3], truth_dir),
                        parse_double(c[4], truth_dir));
      r.yaw_deg = parse_double(c[5], truth_dir);
      r.vax_kmh = parse_double(c[6], truth_dir);
      r.vaz_kmh = parse_double(c[7], truth_dir);
      truth.vehicles.push_back(r);
    }
  }
  return truth;
}

}  // namespace sst
