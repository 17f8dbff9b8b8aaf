#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "sst/errors.hpp"
#include "sst/io.hpp"

// Evaluation of estimated reports against oracle truth. Estimates and
// truth rows are matched by frame for ego velocity and by (frame,
// vehicle id) for surround quantities; no association search is run.

namespace sst {

struct ErrorStats {
  double mae = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  int count = 0;
};

// MAE and RMSE of a signed error sample. Throws EmptyMatchSet on empty
// input; RMSE >= MAE holds by the power-mean inequality.
ErrorStats error_stats(const std::vector<double>& errors);

struct PositionPair {
  double x_est = 0, z_est = 0;
  double x_true = 0, z_true = 0;
};

struct PositionMetrics {
  ErrorStats lateral;       // x_est - x_true
  ErrorStats longitudinal;  // z_est - z_true
  // Inverse-coordinate errors: 1/z for longitudinal, 1/|x| for lateral.
  // The lateral pair set keeps only |x_true| > 0.5 m; near-zero lateral
  // offsets make the inverse unbounded.
  double lat_imae = std::numeric_limits<double>::quiet_NaN();
  double lat_irmse = std::numeric_limits<double>::quiet_NaN();
  double lon_imae = std::numeric_limits<double>::quiet_NaN();
  double lon_irmse = std::numeric_limits<double>::quiet_NaN();
  int n_lateral_inverse = 0;
};

constexpr double kLateralInverseMinOffset = 0.5;

PositionMetrics position_metrics(const std::vector<PositionPair>& pairs);

// 100 * mean of (1 + cos(delta)) / 2 with delta folded modulo pi
// (heading sign is not observable from a box). Pairs are (est, true)
// yaw in radians.
double aos_metric(const std::vector<std::array<double, 2>>& yaw_pairs);

// MAE/RMSE of est - true over matched speed pairs (km/h in, km/h out).
ErrorStats velocity_metrics(const std::vector<std::array<double, 2>>& pairs);

struct MetricsReport {
  PositionMetrics position;
  double aos_percent = std::numeric_limits<double>::quiet_NaN();
  int n_aos = 0;
  ErrorStats ego_speed;       // longitudinal, km/h
  ErrorStats surround_speed;  // longitudinal, km/h
};

// Joins the report against truth and fills every section that has at
// least one matched pair; sections with no pairs keep NaN stats and a
// zero count instead of failing the whole evaluation. Non-finite
// estimated speeds are excluded from the velocity pair sets.
MetricsReport evaluate(const StateReport& report, const SequenceTruth& truth);

void write_metrics(const MetricsReport& m, const std::string& path);

}  // namespace sst
