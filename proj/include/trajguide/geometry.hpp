#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace trajguide {

inline constexpr double kPi = std::numbers::pi;

/// Points closer than this along the camera axis are never in the frustum.
inline constexpr double kNearPlane = 0.05;

/// Normalized coordinates within this of the frame border still count as inside.
inline constexpr double kFrustumSlack = 1e-12;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;

  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec2 xy() const { return {x, y}; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline double distance(Vec3 a, Vec3 b) { return (a - b).norm(); }

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on non-finite input.
double wrap_angle(double theta);

/// Planar pose with height. The yaw is always stored wrapped into (-pi, pi].
class Pose {
 public:
  Pose() = default;
  Pose(double x, double y, double z, double yaw);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  double yaw() const { return yaw_; }

  Vec2 xy() const { return {x_, y_}; }
  Vec3 position() const { return {x_, y_, z_}; }
  Vec2 heading() const { return {std::cos(yaw_), std::sin(yaw_)}; }

  Pose with_xy(Vec2 p) const { return {p.x, p.y, z_, yaw_}; }
  Pose with_z(double z) const { return {x_, y_, z, yaw_}; }
  Pose with_yaw(double yaw) const { return {x_, y_, z_, yaw}; }

  /// Rotates the yaw by `delta` (wrapped).
  Pose rotated(double delta) const { return {x_, y_, z_, yaw_ + delta}; }

  friend bool operator==(const Pose&, const Pose&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
  double yaw_ = 0.0;
};

/// Zero pitch/roll pinhole camera described by its horizontal FOV.
class CameraModel {
 public:
  CameraModel() = default;
  CameraModel(double fov_h, double aspect, double mount_height);

  double fov_h() const { return fov_h_; }
  double aspect() const { return aspect_; }
  double mount_height() const { return mount_height_; }

  double tan_half_h() const { return std::tan(0.5 * fov_h_); }
  double tan_half_v() const { return tan_half_h() / aspect_; }
  double fov_v() const { return 2.0 * std::atan(tan_half_v()); }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;

 private:
  double fov_h_ = kPi / 2.0;
  double aspect_ = 4.0 / 3.0;
  double mount_height_ = 1.2;
};

/// Vector expressed in the observer's camera frame.
struct CameraVector {
  double forward = 0.0;
  double right = 0.0;
  double down = 0.0;
};

/// Normalized image coordinates: u rightward, v downward, both in [-1, 1].
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

CameraVector to_camera_frame(const Pose& observer, Vec3 point);
Vec3 from_camera_frame(const Pose& observer, const CameraVector& c);

/// Unclipped normalized coordinates of a camera-frame vector; requires forward > 0.
Vec2 normalized_coordinates(const CameraModel& camera, const CameraVector& c);

/// Projects a world point; std::nullopt when outside the frustum (boundary inclusive).
std::optional<ImagePoint> project(const CameraModel& camera, const Pose& observer,
                                  Vec3 point);

/// Inverse of project: reconstructs the world point from (u, v, depth).
Vec3 back_project(const CameraModel& camera, const Pose& observer, const ImagePoint& ip);

/// Point on the frame border in the direction of an out-of-view camera-frame vector.
/// In-frustum vectors map to their ordinary projection.
Vec2 border_point(const CameraModel& camera, const CameraVector& c);

/// Divides every distance by the largest visible one and clamps to [0, 1].
/// All zeros when nothing is visible or the largest visible distance is below the
/// near plane.
std::vector<double> normalize_distances(const std::vector<double>& distances,
                                        const std::vector<bool>& visible);

/// The normalization constant used by normalize_distances (0 when degenerate).
double visible_distance_scale(const std::vector<double>& distances,
                              const std::vector<bool>& visible);

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace trajguide
