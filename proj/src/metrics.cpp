#include "sst/metrics.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace sst {

ErrorStats error_stats(const std::vector<double>& errors) {
  if (errors.empty()) throw EmptyMatchSet();
  double abs_sum = 0;
  double sq_sum = 0;
  for (const double e : errors) {
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  ErrorStats s;
  s.count = static_cast<int>(errors.size());
  s.mae = abs_sum / s.count;
  s.rmse = std::sqrt(sq_sum / s.count);
  return s;
}

PositionMetrics position_metrics(const std::vector<PositionPair>& pairs) {
  if (pairs.empty()) throw EmptyMatchSet("no matched position pairs");
  std::vector<double> lat, lon, ilat, ilon;
  for (const PositionPair& p : pairs) {
    lat.push_back(p.x_est - p.x_true);
    lon.push_back(p.z_est - p.z_true);
    ilon.push_back(1.0 / p.z_est - 1.0 / p.z_true);
    if (std::abs(p.x_true) > kLateralInverseMinOffset) {
      ilat.push_back(1.0 / std::abs(p.x_est) - 1.0 / std::abs(p.x_true));
    }
  }
  PositionMetrics m;
  m.lateral = error_stats(lat);
  m.longitudinal = error_stats(lon);
  const ErrorStats is = error_stats(ilon);
  m.lon_imae = is.mae;
  m.lon_irmse = is.rmse;
  if (!ilat.empty()) {
    const ErrorStats s = error_stats(ilat);
    m.lat_imae = s.mae;
    m.lat_irmse = s.rmse;
    m.n_lateral_inverse = s.count;
  }
  return m;
}

double aos_metric(const std::vector<std::array<double, 2>>& yaw_pairs) {
  if (yaw_pairs.empty()) throw EmptyMatchSet("no matched yaw pairs");
  double sum = 0;
  for (const auto& [est, truth] : yaw_pairs) {
    const double folded = std::remainder(est - truth, kPi);
    sum += 0.5 * (1.0 + std::cos(folded));
  }
  return 100.0 * sum / static_cast<double>(yaw_pairs.size());
}

ErrorStats velocity_metrics(const std::vector<std::array<double, 2>>& pairs) {
  if (pairs.empty()) throw EmptyMatchSet("no matched speed pairs");
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& [est, truth] : pairs) errors.push_back(est - truth);
  return error_stats(errors);
}

MetricsReport evaluate(const StateReport& report, const SequenceTruth& truth) {
  MetricsReport m;

  std::map<int, const EgoTruthRow*> ego_truth;
  for (const EgoTruthRow& r : truth.ego) ego_truth[r.frame] = &r;
  std::vector<std::array<double, 2>> ego_pairs;
  for (const EgoRecord& r : report.ego) {
    const auto it = ego_truth.find(r.frame);
    if (it == ego_truth.end() || !std::isfinite(r.vz_kmh)) continue;
    ego_pairs.push_back({r.vz_kmh, it->second->vz_kmh});
  }
  if (!ego_pairs.empty()) m.ego_speed = velocity_metrics(ego_pairs);

  std::map<std::pair<int, int>, const VehicleTruthRow*> veh_truth;
  for (const VehicleTruthRow& r : truth.vehicles) {
    veh_truth[{r.frame, r.vehicle_id}] = &r;
  }
  std::vector<PositionPair> pos_pairs;
  std::vector<std::array<double, 2>> yaw_pairs;
  std::vector<std::array<double, 2>> speed_pairs;
  for (const VehicleRecord& r : report.vehicles) {
    const auto it = veh_truth.find({r.frame, r.vehicle_id});
    if (it == veh_truth.end()) continue;
    const VehicleTruthRow& t = *it->second;
    pos_pairs.push_back(
        {r.position.x(), r.position.z(), t.position.x(), t.position.z()});
    yaw_pairs.push_back({deg2rad(r.yaw_deg), deg2rad(t.yaw_deg)});
    if (std::isfinite(r.vaz_kmh)) {
      speed_pairs.push_back({r.vaz_kmh, t.vaz_kmh});
    }
  }
  if (!pos_pairs.empty()) m.position = position_metrics(pos_pairs);
  if (!yaw_pairs.empty()) {
    m.aos_percent = aos_metric(yaw_pairs);
    m.n_aos = static_cast<int>(yaw_pairs.size());
  }
  if (!speed_pairs.empty()) m.surround_speed = velocity_metrics(speed_pairs);
  return m;
}

void write_metrics(const MetricsReport& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out << "# lateral inverse metrics use pairs with |x_true| > "
      << fmt_g(kLateralInverseMinOffset) << " m only\n";
  out << "position_lat_mae_m= " << fmt_g(m.position.lateral.mae) << "\n";
  out << "position_lat_rmse_m= " << fmt_g(m.position.lateral.rmse) << "\n";
  out << "position_lat_imae_invm= " << fmt_g(m.position.lat_imae) << "\n";
  out << "position_lat_irmse_invm= " << fmt_g(m.position.lat_irmse) << "\n";
  out << "position_lon_mae_m= " << fmt_g(m.position.longitudinal.mae) << "\n";
  out << "position_lon_rmse_m= " << fmt_g(m.position.longitudinal.rmse)
      << "\n";
  out << "position_lon_imae_invm= " << fmt_g(m.position.lon_imae) << "\n";
  out << "position_lon_irmse_invm= " << fmt_g(m.position.lon_irmse) << "\n";
  out << "position_pairs= " << m.position.lateral.count << "\n";
  out << "position_lat_inverse_pairs= " << m.position.n_lateral_inverse
      << "\n";
  out << "aos_percent= " << fmt_g(m.aos_percent) << "\n";
  out << "aos_pairs= " << m.n_aos << "\n";
  out << "ego_speed_mae_kmh= " << fmt_g(m.ego_speed.mae) << "\n";
  out << "ego_speed_rmse_kmh= " << fmt_g(m.ego_speed.rmse) << "\n";
  out << "ego_speed_pairs= " << m.ego_speed.count << "\n";
  out << "surround_speed_mae_kmh= " << fmt_g(m.surround_speed.mae) << "\n";
  out << "surround_speed_rmse_kmh= " << fmt_g(m.surround_speed.rmse) << "\n";
  out << "surround_speed_pairs= " << m.surround_speed.count << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sst
