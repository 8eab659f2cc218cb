#include "trajguide/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "trajguide/error.hpp"

namespace trajguide {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Labels 4-connected free components; returns label per cell (-1 for obstacles)
// and the size of each component.
std::pair<std::vector<int>, std::vector<std::size_t>> label_components(const World& w) {
  std::vector<int> label(w.occupancy().size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<Cell> stack;
  for (int iy = 0; iy < w.height(); ++iy) {
    for (int ix = 0; ix < w.width(); ++ix) {
      const Cell seed{ix, iy};
      if (w.occupied(seed) || label[w.index(seed)] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      std::size_t count = 0;
      label[w.index(seed)] = id;
      stack.push_back(seed);
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        ++count;
        constexpr int kDx[4] = {1, -1, 0, 0};
        constexpr int kDy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const Cell n{c.ix + kDx[k], c.iy + kDy[k]};
          if (w.occupied(n) || label[w.index(n)] >= 0) continue;
          label[w.index(n)] = id;
          stack.push_back(n);
        }
      }
      sizes.push_back(count);
    }
  }
  return {std::move(label), std::move(sizes)};
}

// Visits every cell whose closed square intersects the closed segment a-b, with
// the parameter interval [t0, t1] of the segment inside that square. Coordinates
// are in grid units. Returning false from the visitor stops the walk.
template <typename Visitor>
void walk_cells(Vec2 a, Vec2 b, Visitor&& visit) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double xmin = std::min(a.x, b.x);
  const double xmax = std::max(a.x, b.x);
  const auto y_at = [&](double x) {
    if (dx == 0.0) return a.y;
    return a.y + (x - a.x) * (dy / dx);
  };
  const auto t_range = [](double p0, double d, double lo, double hi) -> std::pair<double, double> {
    if (d == 0.0) return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double t0 = (lo - p0) / d;
    double t1 = (hi - p0) / d;
    if (t0 > t1) std::swap(t0, t1);
    return {t0, t1};
  };

  const int col_begin = static_cast<int>(std::ceil(xmin)) - 1;
  const int col_end = static_cast<int>(std::floor(xmax));
  for (int ix = col_begin; ix <= col_end; ++ix) {
    double x0 = std::max(xmin, static_cast<double>(ix));
    double x1 = std::min(xmax, static_cast<double>(ix + 1));
    if (x0 > x1) continue;
    double ya = dx == 0.0 ? std::min(a.y, b.y) : y_at(x0);
    double yb = dx == 0.0 ? std::max(a.y, b.y) : y_at(x1);
    const double ylo = std::min(ya, yb);
    const double yhi = std::max(ya, yb);
    const auto [tx0, tx1] = t_range(a.x, dx, ix, ix + 1);
    const int row_begin = static_cast<int>(std::ceil(ylo)) - 1;
    const int row_end = static_cast<int>(std::floor(yhi));
    for (int iy = row_begin; iy <= row_end; ++iy) {
      const auto [ty0, ty1] = t_range(a.y, dy, iy, iy + 1);
      const double t0 = std::max({0.0, tx0, ty0});
      const double t1 = std::min({1.0, tx1, ty1});
      if (!visit(Cell{ix, iy}, std::clamp(t0, 0.0, 1.0), std::clamp(t1, 0.0, 1.0))) return;
    }
  }
}

void check_in_bounds(const World& world, Vec2 p, const char* what) {
  if (!world.in_bounds(p)) throw std::invalid_argument(std::string(what) + " outside world bounds");
}

double sample_triangular(Rng& rng, double lo, double mode, double hi) {
  const double intervals[] = {lo, mode, hi};
  const double weights[] = {0.0, 1.0, 0.0};
  std::piecewise_linear_distribution<double> dist(std::begin(intervals), std::end(intervals),
                                                  std::begin(weights));
  return dist(rng);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// World

World::World(int width, int height, double cell_size, double obstacle_height,
             std::vector<std::uint8_t> occupancy)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      obstacle_height_(obstacle_height),
      occupancy_(std::move(occupancy)) {
  if (width < 3 || height < 3) throw std::invalid_argument("World: grid must be at least 3x3");
  if (!(cell_size > 0.0)) throw std::invalid_argument("World: cell_size must be > 0");
  if (!(obstacle_height >= 0.0)) throw std::invalid_argument("World: obstacle_height must be >= 0");
  if (occupancy_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("World: occupancy size mismatch");
  }
  for (auto& v : occupancy_) v = v ? 1 : 0;
  for (int ix = 0; ix < width; ++ix) {
    if (!occupied(ix, 0) || !occupied(ix, height - 1)) throw std::invalid_argument("World: open boundary");
  }
  for (int iy = 0; iy < height; ++iy) {
    if (!occupied(0, iy) || !occupied(width - 1, iy)) throw std::invalid_argument("World: open boundary");
  }
  if (free_cell_count() == 0) throw std::invalid_argument("World: no free cell");
}

World World::empty(int width, int height, double cell_size, double obstacle_height) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(width) * height, 0);
  for (int iy = 0; iy < height; ++iy) {
    for (int ix = 0; ix < width; ++ix) {
      if (ix == 0 || iy == 0 || ix == width - 1 || iy == height - 1) {
        occ[static_cast<std::size_t>(iy) * width + ix] = 1;
      }
    }
  }
  return World(width, height, cell_size, obstacle_height, std::move(occ));
}

bool World::occupied(int ix, int iy) const {
  if (!in_grid(ix, iy)) return true;
  return occupancy_[static_cast<std::size_t>(iy) * width_ + ix] != 0;
}

bool World::in_bounds(Vec2 p) const {
  const Vec2 e = extent();
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= e.x && p.y <= e.y;
}

Cell World::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor(p.x / cell_size_)), static_cast<int>(std::floor(p.y / cell_size_))};
}

Vec2 World::cell_center(Cell c) const {
  return {(c.ix + 0.5) * cell_size_, (c.iy + 0.5) * cell_size_};
}

std::size_t World::free_cell_count() const {
  return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), 0));
}

std::size_t World::largest_free_component() const {
  const auto sizes = label_components(*this).second;
  return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

World generate_world(std::uint64_t seed, const WorldParams& params) {
  if (params.width < 10 || params.height < 10) throw std::invalid_argument("generate_world: size must be >= 10x10");
  if (!(params.density >= 0.0 && params.density <= 0.35)) {
    throw std::invalid_argument("generate_world: density must be in [0, 0.35]");
  }
  if (params.min_rect < 1 || params.max_rect < params.min_rect) {
    throw std::invalid_argument("generate_world: bad rectangle size range");
  }
  World world = World::empty(params.width, params.height, params.cell_size, params.obstacle_height);
  const std::size_t interior = static_cast<std::size_t>(params.width - 2) * (params.height - 2);
  const auto target = static_cast<std::size_t>(std::ceil(params.density * interior));
  std::size_t placed = 0;

  Rng rng(seed);
  std::uniform_int_distribution<int> side(params.min_rect, params.max_rect);
  for (int attempt = 0; placed < target; ++attempt) {
    if (attempt >= params.max_attempts) {
      throw SamplingError("generate_world: could not reach requested density");
    }
    const int w = std::min(side(rng), params.width - 2);
    const int h = std::min(side(rng), params.height - 2);
    const int x0 = std::uniform_int_distribution<int>(1, params.width - 1 - w)(rng);
    const int y0 = std::uniform_int_distribution<int>(1, params.height - 1 - h)(rng);

    auto occ = world.occupancy();
    std::size_t added = 0;
    for (int iy = y0; iy < y0 + h; ++iy) {
      for (int ix = x0; ix < x0 + w; ++ix) {
        auto& cell = occ[static_cast<std::size_t>(iy) * params.width + ix];
        if (!cell) {
          cell = 1;
          ++added;
        }
      }
    }
    if (added == 0 || added == world.free_cell_count()) continue;
    World candidate(params.width, params.height, params.cell_size, params.obstacle_height, std::move(occ));
    if (10 * candidate.largest_free_component() < 9 * candidate.free_cell_count()) continue;
    world = std::move(candidate);
    placed += added;
  }
  return world;
}

// ---------------------------------------------------------------------------
// Raycasting

bool raycast(const World& world, Vec3 origin, Vec3 target) {
  check_in_bounds(world, origin.xy(), "raycast origin");
  check_in_bounds(world, target.xy(), "raycast target");
  const double c = world.cell_size();
  const double h = world.obstacle_height();
  bool clear = true;
  walk_cells({origin.x / c, origin.y / c}, {target.x / c, target.y / c},
             [&](Cell cell, double t0, double t1) {
               if (!world.occupied(cell)) return true;
               const double za = origin.z + t0 * (target.z - origin.z);
               const double zb = origin.z + t1 * (target.z - origin.z);
               if (std::min(za, zb) <= h && std::max(za, zb) >= 0.0) {
                 clear = false;
                 return false;
               }
               return true;
             });
  return clear;
}

double cast_ray(const World& world, Vec2 origin, double heading) {
  check_in_bounds(world, origin, "cast_ray origin");
  const Vec2 e = world.extent();
  const Vec2 dir{std::cos(heading), std::sin(heading)};
  // distance to the arena box exit; the boundary wall is always hit before it
  double reach = std::hypot(e.x, e.y);
  if (dir.x > 0.0) reach = std::min(reach, (e.x - origin.x) / dir.x);
  if (dir.x < 0.0) reach = std::min(reach, -origin.x / dir.x);
  if (dir.y > 0.0) reach = std::min(reach, (e.y - origin.y) / dir.y);
  if (dir.y < 0.0) reach = std::min(reach, -origin.y / dir.y);
  reach = std::max(reach, 0.0) + 1e-9;
  const Vec2 end = origin + reach * dir;
  const double c = world.cell_size();
  double best = 1.0;
  walk_cells({origin.x / c, origin.y / c}, {end.x / c, end.y / c}, [&](Cell cell, double t0, double) {
    if (world.occupied(cell)) best = std::min(best, t0);
    return true;
  });
  return best * reach;
}

double DepthScan::bearing(std::size_t i) const {
  return std::atan(u.at(i) * std::tan(0.5 * fov_h));
}

std::size_t DepthScan::nearest_ray(double target_u) const {
  if (u.empty()) throw std::logic_error("DepthScan: empty scan");
  const double n = static_cast<double>(u.size() - 1);
  const double idx = std::round((std::clamp(target_u, -1.0, 1.0) + 1.0) * 0.5 * n);
  return static_cast<std::size_t>(idx);
}

DepthScan render_depth(const World& world, const CameraModel& camera, const Pose& observer,
                       std::size_t n_rays) {
  if (n_rays < 8) throw std::invalid_argument("render_depth: need at least 8 rays");
  DepthScan scan;
  scan.fov_h = camera.fov_h();
  scan.u.resize(n_rays);
  scan.range.resize(n_rays);
  scan.hits_ground.assign(n_rays, false);
  for (std::size_t i = 0; i < n_rays; ++i) {
    scan.u[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n_rays - 1);
    const double heading = observer.yaw() - scan.bearing(i);
    scan.range[i] = cast_ray(world, observer.xy(), heading);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Distance field

DistanceField::DistanceField(int width, int height, double cell_size, std::vector<double> values)
    : width_(width), height_(height), cell_size_(cell_size), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("DistanceField: size mismatch");
  }
}

double DistanceField::at(int ix, int iy) const {
  ix = std::clamp(ix, 0, width_ - 1);
  iy = std::clamp(iy, 0, height_ - 1);
  return values_[static_cast<std::size_t>(iy) * width_ + ix];
}

double DistanceField::sample(Vec2 p) const {
  const double gx = std::clamp(p.x / cell_size_ - 0.5, 0.0, static_cast<double>(width_ - 1));
  const double gy = std::clamp(p.y / cell_size_ - 0.5, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(gx), width_ - 2);
  const int y0 = std::min(static_cast<int>(gy), height_ - 2);
  const double fx = gx - x0;
  const double fy = gy - y0;
  const double v00 = at(x0, y0);
  const double v10 = at(x0 + 1, y0);
  const double v01 = at(x0, y0 + 1);
  const double v11 = at(x0 + 1, y0 + 1);
  return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

namespace {

// Felzenszwalb-Huttenlocher lower envelope of parabolas; squared distances.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
               (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
          (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = f[v[k]] == kInf ? kInf : diff * diff + f[v[k]];
  }
}

}  // namespace

DistanceField build_distance_field(const World& world, double saturation) {
  const int w = world.width();
  const int h = world.height();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> sq(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = world.occupancy()[i] ? 0.0 : kInf;

  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  // rows
  f.resize(w);
  d.resize(w);
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) f[ix] = sq[static_cast<std::size_t>(iy) * w + ix];
    edt_1d(f, d, v, z);
    for (int ix = 0; ix < w; ++ix) sq[static_cast<std::size_t>(iy) * w + ix] = d[ix];
  }
  // columns
  f.resize(h);
  d.resize(h);
  for (int ix = 0; ix < w; ++ix) {
    for (int iy = 0; iy < h; ++iy) f[iy] = sq[static_cast<std::size_t>(iy) * w + ix];
    edt_1d(f, d, v, z);
    for (int iy = 0; iy < h; ++iy) sq[static_cast<std::size_t>(iy) * w + ix] = d[iy];
  }
  std::vector<double> values(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    values[i] = std::min(std::sqrt(sq[i]) * world.cell_size(), saturation);
  }
  return DistanceField(w, h, world.cell_size(), std::move(values));
}

// ---------------------------------------------------------------------------
// Planning

double PlannedPath::polyline_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) total += distance(polyline[i - 1], polyline[i]);
  return total;
}

bool segment_clear(const DistanceField& df, Vec2 a, Vec2 b, double clearance) {
  const double len = distance(a, b);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (df.cell_size() / 8.0))));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    if (df.sample(a + t * (b - a)) < clearance) return false;
  }
  return true;
}

namespace {

struct PathCost {
  int straight = 0;
  int diagonal = 0;
  double value() const { return straight + kSqrt2 * diagonal; }
};

std::vector<Cell> astar(const World& world, const DistanceField& df, Cell start, Cell goal,
                        double clearance) {
  const int w = world.width();
  const auto traversable = [&](Cell c) {
    if (world.occupied(c)) return false;
    return c == start || c == goal || df.at(c) >= clearance;
  };
  const auto octile = [&](Cell c) {
    const int dx = std::abs(c.ix - goal.ix);
    const int dy = std::abs(c.iy - goal.iy);
    return std::abs(dx - dy) + kSqrt2 * std::min(dx, dy);
  };

  const std::size_t n = world.occupancy().size();
  std::vector<PathCost> cost(n);
  std::vector<char> reached(n, 0), closed(n, 0);
  std::vector<std::size_t> parent(n, n);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const std::size_t s = world.index(start);
  reached[s] = 1;
  open.push({octile(start), s});
  const std::size_t g = world.index(goal);
  while (!open.empty()) {
    const std::size_t cur = open.top().second;
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == g) break;
    const Cell c{static_cast<int>(cur % w), static_cast<int>(cur / w)};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell nb{c.ix + dx, c.iy + dy};
        if (!traversable(nb)) continue;
        const bool diag = dx != 0 && dy != 0;
        if (diag && (!traversable({c.ix + dx, c.iy}) || !traversable({c.ix, c.iy + dy}))) continue;
        const std::size_t ni = world.index(nb);
        if (closed[ni]) continue;
        PathCost next = cost[cur];
        (diag ? next.diagonal : next.straight) += 1;
        if (!reached[ni] || next.value() < cost[ni].value()) {
          reached[ni] = 1;
          cost[ni] = next;
          parent[ni] = cur;
          open.push({next.value() + octile(nb), ni});
        }
      }
    }
  }
  if (!closed[g]) return {};
  std::vector<Cell> cells;
  for (std::size_t i = g; i != n; i = parent[i]) {
    cells.push_back({static_cast<int>(i % w), static_cast<int>(i / w)});
  }
  std::reverse(cells.begin(), cells.end());
  return cells;
}

}  // namespace

PlannedPath plan_path(const World& world, Vec2 start, Vec2 goal, double clearance) {
  if (!world.is_free(start)) throw std::invalid_argument("plan_path: start not in free space");
  if (!world.is_free(goal)) throw std::invalid_argument("plan_path: goal not in free space");
  const DistanceField df = build_distance_field(world);
  const Cell cs = world.cell_of(start);
  const Cell cg = world.cell_of(goal);

  PlannedPath out;
  if (cs == cg) {
    out.cells = {cs};
    out.polyline = {start, goal};
    out.geodesic = 0.0;
    return out;
  }
  out.cells = astar(world, df, cs, cg, clearance);
  if (out.cells.empty()) throw NoPathError("plan_path: goal unreachable");

  PathCost total;
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    const bool diag = out.cells[i].ix != out.cells[i - 1].ix && out.cells[i].iy != out.cells[i - 1].iy;
    (diag ? total.diagonal : total.straight) += 1;
  }
  out.geodesic = world.cell_size() * total.value();

  std::vector<Vec2> raw;
  raw.reserve(out.cells.size());
  for (const Cell& c : out.cells) raw.push_back(world.cell_center(c));
  raw.front() = start;
  raw.back() = goal;

  out.polyline.push_back(raw.front());
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !segment_clear(df, raw[i], raw[j], clearance)) --j;
    out.polyline.push_back(raw[j]);
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories and query poses

std::vector<Pose> place_frames(const std::vector<Vec2>& path, double height, Rng& rng,
                               const TrajectoryParams& params) {
  std::vector<Pose> frames;
  if (path.size() < 2) return frames;
  std::uniform_real_distribution<double> spacing(params.min_spacing, params.max_spacing);
  std::normal_distribution<double> yaw_noise(0.0, 1.0);

  std::size_t seg = 0;
  double seg_start = 0.0;  // arc length at path[seg]
  double s = 0.0;
  while (true) {
    while (seg + 1 < path.size() && s > seg_start + distance(path[seg], path[seg + 1])) {
      seg_start += distance(path[seg], path[seg + 1]);
      ++seg;
    }
    if (seg + 1 >= path.size()) break;
    const double seg_len = distance(path[seg], path[seg + 1]);
    // skip degenerate segments for the tangent
    std::size_t tseg = seg;
    while (tseg + 1 < path.size() && distance(path[tseg], path[tseg + 1]) == 0.0) ++tseg;
    if (tseg + 1 >= path.size()) break;
    const Vec2 dir = path[tseg + 1] - path[tseg];
    const double t = seg_len > 0.0 ? (s - seg_start) / seg_len : 0.0;
    const Vec2 p = path[seg] + t * (path[seg + 1] - path[seg]);
    const double yaw = std::atan2(dir.y, dir.x) + params.yaw_sigma * yaw_noise(rng);
    frames.emplace_back(p.x, p.y, height, yaw);
    s += spacing(rng);
  }
  return frames;
}

ReferenceTrajectory sample_reference_trajectory(const World& world, std::uint64_t seed,
                                                const CameraModel& recorder_camera,
                                                const TrajectoryParams& params) {
  if (params.max_frames < 2) throw std::invalid_argument("sample_reference_trajectory: max_frames < 2");
  Rng rng(seed);
  const DistanceField df = build_distance_field(world);
  const auto [labels, sizes] = label_components(world);
  const int main_label =
      static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

  std::vector<Cell> candidates;
  for (int iy = 0; iy < world.height(); ++iy) {
    for (int ix = 0; ix < world.width(); ++ix) {
      const Cell c{ix, iy};
      if (labels[world.index(c)] == main_label && df.at(c) >= params.clearance) candidates.push_back(c);
    }
  }
  if (candidates.size() < 2) throw SamplingError("sample_reference_trajectory: no free space");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    const Vec2 start = world.cell_center(candidates[pick(rng)]);
    const Vec2 goal = world.cell_center(candidates[pick(rng)]);
    if (distance(start, goal) > params.max_geodesic) continue;
    PlannedPath path;
    try {
      path = plan_path(world, start, goal, params.clearance);
    } catch (const NoPathError&) {
      continue;
    }
    if (path.geodesic < params.min_geodesic || path.geodesic > params.max_geodesic) continue;

    std::vector<Pose> frames = place_frames(path.polyline, recorder_camera.mount_height(), rng, params);
    if (frames.size() < 2) continue;
    std::size_t stride = 1;
    if (frames.size() > params.max_frames) {
      std::vector<Pose> sub;
      const std::size_t n = frames.size();
      std::size_t prev = 0;
      for (std::size_t i = 0; i < params.max_frames; ++i) {
        const std::size_t idx = static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * (n - 1) / (params.max_frames - 1)));
        if (i > 0) stride = std::max(stride, idx - prev);
        prev = idx;
        sub.push_back(frames[idx]);
      }
      frames = std::move(sub);
    }
    ReferenceTrajectory traj;
    traj.poses = std::move(frames);
    traj.camera = recorder_camera;
    traj.dense_path = std::move(path.polyline);
    traj.max_frame_spacing = params.max_spacing * static_cast<double>(stride);
    return traj;
  }
  throw SamplingError("sample_reference_trajectory: no start/goal pair within the geodesic range");
}

bool is_visible(const World& world, const CameraModel& camera, const Pose& observer, Vec3 point) {
  if (!project(camera, observer, point)) return false;
  if (!world.in_bounds(point.xy())) return false;
  return raycast(world, observer.position(), point);
}

std::size_t count_visible_frames(const World& world, const CameraModel& camera,
                                 const Pose& observer, const ReferenceTrajectory& traj) {
  std::size_t count = 0;
  for (const Pose& p : traj.poses) {
    if (distance(observer.position(), p.position()) <= kNearPlane) continue;
    if (is_visible(world, camera, observer, p.position())) ++count;
  }
  return count;
}

QuerySample sample_query_pose(const World& world, const ReferenceTrajectory& traj, InitMode mode,
                              std::size_t anchor, std::uint64_t seed,
                              const CameraModel& agent_camera, const QueryParams& params) {
  if (anchor < 1 || anchor > traj.size()) throw std::invalid_argument("sample_query_pose: anchor out of range");
  const Pose& base = traj.frame(anchor);
  if (mode == InitMode::On) {
    return {base.with_z(agent_camera.mount_height()), anchor, 0.0};
  }

  Rng rng(seed);
  const DistanceField df = build_distance_field(world);
  const auto labels = label_components(world).first;
  const int anchor_label = labels[world.index(world.cell_of(base.xy()))];
  std::uniform_real_distribution<double> angle(-kPi, kPi);

  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    const double r = sample_triangular(rng, 0.0, params.offset_mode, params.offset_max);
    const double dir = angle(rng);
    const double yaw = angle(rng);
    const Vec2 p = base.xy() + r * Vec2{std::cos(dir), std::sin(dir)};
    if (!world.is_free(p)) continue;
    if (labels[world.index(world.cell_of(p))] != anchor_label) continue;
    if (df.sample(p) < params.clearance) continue;
    const Pose candidate(p.x, p.y, agent_camera.mount_height(), yaw);
    if (count_visible_frames(world, agent_camera, candidate, traj) < params.min_visible) continue;
    return {candidate, anchor, r};
  }
  throw SamplingError("sample_query_pose: no valid off-trajectory start");
}

// ---------------------------------------------------------------------------
// Serialization

std::string world_to_text(const World& world) {
  std::string out = "trajguide-world v1 " + std::to_string(world.width()) + " " +
                    std::to_string(world.height()) + " " + format_double(world.cell_size()) + " " +
                    format_double(world.obstacle_height()) + "\n";
  for (int iy = world.height() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < world.width(); ++ix) out += world.occupied(ix, iy) ? '#' : '.';
    out += '\n';
  }
  return out;
}

World world_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header)) throw ParseError("world: empty input");
  std::istringstream hs(header);
  std::string magic, version, cell_str, height_str;
  int width = 0, height = 0;
  if (!(hs >> magic >> version >> width >> height >> cell_str >> height_str) || magic != "trajguide-world") {
    throw ParseError("world: bad header line");
  }
  if (version != "v1") throw ParseError("world: unsupported version " + version);
  const auto parse_num = [](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("world: bad number " + s);
    return v;
  };
  const double cell = parse_num(cell_str);
  const double obstacle_height = parse_num(height_str);
  if (width < 3 || height < 3) throw ParseError("world: bad dimensions");

  std::vector<std::uint8_t> occ(static_cast<std::size_t>(width) * height, 0);
  std::string line;
  for (int row = 0; row < height; ++row) {
    if (!std::getline(in, line)) throw ParseError("world: missing grid rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != width) {
      throw ParseError("world: row " + std::to_string(row + 1) + " has wrong width");
    }
    const int iy = height - 1 - row;
    for (int ix = 0; ix < width; ++ix) {
      if (line[ix] == '#') {
        occ[static_cast<std::size_t>(iy) * width + ix] = 1;
      } else if (line[ix] != '.') {
        throw ParseError("world: unexpected character in row " + std::to_string(row + 1));
      }
    }
  }
  try {
    return World(width, height, cell, obstacle_height, std::move(occ));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("world: ") + e.what());
  }
}

void save_world(const World& world, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  out << world_to_text(world);
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

World load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return world_from_text(buf.str());
}

}  // namespace trajguide
