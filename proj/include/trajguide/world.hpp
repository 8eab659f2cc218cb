#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajguide/geometry.hpp"
#include "trajguide/rng.hpp"

namespace trajguide {

struct Cell {
  int ix = 0;
  int iy = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Closed arena of extruded obstacles on a uniform grid. Cell (ix, iy) covers
/// [ix * c, (ix + 1) * c] x [iy * c, (iy + 1) * c]; the world origin is (0, 0).
/// Immutable after construction.
class World {
 public:
  World(int width, int height, double cell_size, double obstacle_height,
        std::vector<std::uint8_t> occupancy);

  /// Arena with walls on the boundary cells only.
  static World empty(int width, int height, double cell_size, double obstacle_height = 2.5);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  double obstacle_height() const { return obstacle_height_; }
  Vec2 extent() const { return {width_ * cell_size_, height_ * cell_size_}; }

  /// Cells outside the grid count as obstacles.
  bool occupied(int ix, int iy) const;
  bool occupied(Cell c) const { return occupied(c.ix, c.iy); }
  bool in_grid(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width_ && iy < height_; }

  bool in_bounds(Vec2 p) const;
  /// Containing cell; points on a shared edge belong to the upper/right cell.
  Cell cell_of(Vec2 p) const;
  Vec2 cell_center(Cell c) const;
  bool is_free(Vec2 p) const { return in_bounds(p) && !occupied(cell_of(p)); }

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.iy) * width_ + c.ix; }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  std::size_t free_cell_count() const;
  /// Size of the largest 4-connected free component.
  std::size_t largest_free_component() const;

  friend bool operator==(const World&, const World&) = default;

 private:
  int width_;
  int height_;
  double cell_size_;
  double obstacle_height_;
  std::vector<std::uint8_t> occupancy_;  // 1 = obstacle
};

struct WorldParams {
  int width = 80;
  int height = 80;
  double cell_size = 0.25;
  double obstacle_height = 2.5;
  double density = 0.15;  // target obstacle fraction of interior cells
  int min_rect = 2;       // rectangle side range, cells
  int max_rect = 12;
  int max_attempts = 5000;
};

/// Deterministic in `seed`. Throws SamplingError when the density cannot be
/// reached while keeping 90% of free cells connected.
World generate_world(std::uint64_t seed, const WorldParams& params = {});

/// Exact grid walk of the 3D segment. Blocked iff it crosses an obstacle cell at
/// a height within [0, obstacle_height]. Edge and corner contacts with an
/// obstacle cell block. Throws std::invalid_argument for out-of-bounds endpoints.
bool raycast(const World& world, Vec3 origin, Vec3 target);

/// Horizontal range from `origin` along `heading` to the first obstacle cell.
double cast_ray(const World& world, Vec2 origin, double heading);

/// Horizontal scan at v = 0; entry i corresponds to u = -1 + 2 i / (n - 1).
struct DepthScan {
  std::vector<double> u;
  std::vector<double> range;      // meters along each ray
  std::vector<bool> hits_ground;  // always false for the horizontal v = 0 scan
  double fov_h = 0.0;

  std::size_t size() const { return range.size(); }
  /// Bearing of ray i relative to the optical axis, positive to the right.
  double bearing(std::size_t i) const;
  /// Index of the ray nearest to normalized coordinate u.
  std::size_t nearest_ray(double u) const;
};

DepthScan render_depth(const World& world, const CameraModel& camera, const Pose& observer,
                       std::size_t n_rays);

inline constexpr double kDistanceSaturation = 5.0;

/// Euclidean distance from each cell center to the nearest obstacle cell center.
class DistanceField {
 public:
  DistanceField(int width, int height, double cell_size, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  double at(int ix, int iy) const;
  double at(Cell c) const { return at(c.ix, c.iy); }
  /// Bilinear interpolation between cell centers, clamped at the grid edge.
  double sample(Vec2 p) const;
  const std::vector<double>& values() const { return values_; }

 private:
  int width_;
  int height_;
  double cell_size_;
  std::vector<double> values_;
};

DistanceField build_distance_field(const World& world, double saturation = kDistanceSaturation);

struct PlannedPath {
  std::vector<Vec2> polyline;  // smoothed, from start to goal
  std::vector<Cell> cells;     // grid-optimal cell sequence
  double geodesic = 0.0;       // grid-optimal length, meters
  double polyline_length() const;
};

/// 8-connected shortest path (diagonals cost sqrt(2) * cell_size and may not cut
/// corners) followed by clearance-preserving string pulling. Cells whose center
/// clearance is below `clearance` are not traversable, except the endpoint cells.
/// Throws NoPathError when the goal is unreachable and std::invalid_argument
/// when an endpoint is not in free space.
PlannedPath plan_path(const World& world, Vec2 start, Vec2 goal, double clearance = 0.2);

/// True when every point of the segment keeps `clearance` in the distance field.
bool segment_clear(const DistanceField& df, Vec2 a, Vec2 b, double clearance);

struct ReferenceTrajectory {
  std::vector<Pose> poses;
  CameraModel camera;
  std::vector<Vec2> dense_path;
  double max_frame_spacing = 1.5;

  std::size_t size() const { return poses.size(); }
  /// 1-based access, matching trajectory frame numbering.
  const Pose& frame(std::size_t i) const { return poses.at(i - 1); }
};

struct TrajectoryParams {
  double min_geodesic = 8.0;
  double max_geodesic = 60.0;
  double min_spacing = 0.5;
  double max_spacing = 1.5;
  std::size_t max_frames = 40;
  double yaw_sigma = deg2rad(5.0);
  double clearance = 0.5;  // recorded route keeps off walls; agents only need their radius
  int max_attempts = 500;
};

/// Places frames along a planned path between random free endpoints.
/// Throws SamplingError or NoPathError on failure.
ReferenceTrajectory sample_reference_trajectory(const World& world, std::uint64_t seed,
                                                const CameraModel& recorder_camera,
                                                const TrajectoryParams& params = {});

/// Frames of `path` at the arc-length spacings the generator draws, before
/// subsampling. Exposed so the spacing contract can be replayed.
std::vector<Pose> place_frames(const std::vector<Vec2>& path, double height, Rng& rng,
                               const TrajectoryParams& params);

enum class InitMode { On, Off };

struct QueryParams {
  double offset_mode = 2.0;
  double offset_max = 10.0;
  std::size_t min_visible = 3;
  double clearance = 0.2;
  int max_attempts = 2000;
};

struct QuerySample {
  Pose pose;
  std::size_t anchor = 1;  // 1-based frame the start is drawn around
  double offset = 0.0;     // planar distance from the anchor frame
};

/// True iff `point` projects into the camera and the sight line is unobstructed.
bool is_visible(const World& world, const CameraModel& camera, const Pose& observer, Vec3 point);

std::size_t count_visible_frames(const World& world, const CameraModel& camera,
                                 const Pose& observer, const ReferenceTrajectory& traj);

/// On: the anchor frame with the agent's mount height. Off: a free pose drawn at a
/// triangular-distributed offset from the anchor frame with uniform yaw, accepted
/// when at least `min_visible` frames are visible. Throws SamplingError.
QuerySample sample_query_pose(const World& world, const ReferenceTrajectory& traj,
                              InitMode mode, std::size_t anchor, std::uint64_t seed,
                              const CameraModel& agent_camera, const QueryParams& params = {});

// Text format: "trajguide-world v1 <width> <height> <cell_size> <obstacle_height>"
// followed by one line of '.'/'#' per grid row, highest row first.
std::string world_to_text(const World& world);
World world_from_text(std::string_view text);
void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);

}  // namespace trajguide
