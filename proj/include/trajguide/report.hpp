#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trajguide/io.hpp"

namespace trajguide {

struct AggregateRow {
  std::string task;
  std::string init;
  std::string camera_mode;
  std::string controller;
  double success_rate = 0.0;
  double spl = 0.0;
  std::size_t n = 0;  // valid episodes
  double mean_steps = 0.0;
  double mean_collisions = 0.0;
  std::size_t invalid = 0;
};

/// Groups by (task, init, camera_mode, controller), sorted by that key.
std::vector<AggregateRow> aggregate(const std::vector<EpisodeRecord>& records);

std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::string aggregate_markdown(const std::vector<AggregateRow>& rows);

struct CurvePoint {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  std::size_t successes = 0;
  double success_rate() const { return n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n); }
};

/// SR over the start offset of valid off-trajectory episodes, in fixed-width buckets.
/// Buckets run from 0 up to the largest occupied one; empty buckets are kept.
std::vector<CurvePoint> init_distance_curve(const std::vector<EpisodeRecord>& records, double bucket = 0.5);

/// Count-weighted centered moving window over buckets (window must be odd).
std::vector<CurvePoint> smooth_curve(const std::vector<CurvePoint>& curve, std::size_t window = 3);

/// Bucket containing x (or the last bucket when x is beyond the curve).
const CurvePoint& bucket_at(const std::vector<CurvePoint>& curve, double x);

/// SR per sweep magnitude for one swept parameter (records with camera_mode sweep).
std::vector<CurvePoint> mismatch_curve(const std::vector<EpisodeRecord>& records, SweepParameter parameter);

std::string curve_csv(const std::vector<CurvePoint>& curve, const std::string& x_name);

}  // namespace trajguide
