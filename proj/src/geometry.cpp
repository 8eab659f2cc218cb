#include "trajguide/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace trajguide {

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  double r = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

Pose::Pose(double x, double y, double z, double yaw)
    : x_(x), y_(y), z_(z), yaw_(wrap_angle(yaw)) {
  if (!(z >= 0.0)) throw std::invalid_argument("Pose: z must be >= 0");
}

CameraModel::CameraModel(double fov_h, double aspect, double mount_height)
    : fov_h_(fov_h), aspect_(aspect), mount_height_(mount_height) {
  if (!(fov_h > 0.0 && fov_h < kPi)) throw std::invalid_argument("CameraModel: fov_h out of (0, pi)");
  if (!(aspect > 0.0)) throw std::invalid_argument("CameraModel: aspect must be > 0");
  if (!(mount_height >= 0.0)) throw std::invalid_argument("CameraModel: mount_height must be >= 0");
}

CameraVector to_camera_frame(const Pose& observer, Vec3 point) {
  const double dx = point.x - observer.x();
  const double dy = point.y - observer.y();
  const double c = std::cos(observer.yaw());
  const double s = std::sin(observer.yaw());
  // right axis is the heading rotated by -90 degrees: (sin, -cos)
  return {dx * c + dy * s, dx * s - dy * c, observer.z() - point.z};
}

Vec3 from_camera_frame(const Pose& observer, const CameraVector& v) {
  const double c = std::cos(observer.yaw());
  const double s = std::sin(observer.yaw());
  return {observer.x() + v.forward * c + v.right * s,
          observer.y() + v.forward * s - v.right * c, observer.z() - v.down};
}

Vec2 normalized_coordinates(const CameraModel& camera, const CameraVector& c) {
  return {(c.right / c.forward) / camera.tan_half_h(),
          (c.down / c.forward) / camera.tan_half_v()};
}

std::optional<ImagePoint> project(const CameraModel& camera, const Pose& observer,
                                  Vec3 point) {
  const CameraVector c = to_camera_frame(observer, point);
  if (c.forward <= kNearPlane) return std::nullopt;
  const Vec2 uv = normalized_coordinates(camera, c);
  if (std::abs(uv.x) > 1.0 + kFrustumSlack || std::abs(uv.y) > 1.0 + kFrustumSlack) return std::nullopt;
  // points a rounding error past the border (e.g. exactly on a 45 degree edge) sit on it
  return ImagePoint{std::clamp(uv.x, -1.0, 1.0), std::clamp(uv.y, -1.0, 1.0), c.forward};
}

Vec3 back_project(const CameraModel& camera, const Pose& observer, const ImagePoint& ip) {
  const CameraVector c{ip.depth, ip.u * camera.tan_half_h() * ip.depth,
                       ip.v * camera.tan_half_v() * ip.depth};
  return from_camera_frame(observer, c);
}

Vec2 border_point(const CameraModel& camera, const CameraVector& c) {
  if (c.forward > kNearPlane) {
    const Vec2 uv = normalized_coordinates(camera, c);
    return {std::clamp(uv.x, -1.0, 1.0), std::clamp(uv.y, -1.0, 1.0)};
  }
  // Beside or behind the camera: pin u to the side the point lies on. Dead-behind
  // points go to the left border.
  const double u = c.right > 0.0 ? 1.0 : -1.0;
  const double horizontal = std::hypot(c.forward, c.right);
  double v = 0.0;
  if (horizontal > 0.0) {
    v = std::clamp((c.down / horizontal) / camera.tan_half_v(), -1.0, 1.0);
  } else if (c.down != 0.0) {
    v = c.down > 0.0 ? 1.0 : -1.0;
  }
  return {u, v};
}

double visible_distance_scale(const std::vector<double>& distances,
                              const std::vector<bool>& visible) {
  if (distances.size() != visible.size()) {
    throw std::invalid_argument("normalize_distances: length mismatch");
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (visible[i]) scale = std::max(scale, distances[i]);
  }
  return scale <= kNearPlane ? 0.0 : scale;
}

std::vector<double> normalize_distances(const std::vector<double>& distances,
                                        const std::vector<bool>& visible) {
  const double scale = visible_distance_scale(distances, visible);
  std::vector<double> out(distances.size(), 0.0);
  if (scale == 0.0) return out;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    out[i] = std::clamp(distances[i] / scale, 0.0, 1.0);
  }
  return out;
}

}  // namespace trajguide
