#include "trajguide/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace trajguide {

namespace {

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<EpisodeRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, std::vector<const EpisodeRecord*>> groups;
  for (const auto& r : records) {
    const Key key{std::string(to_string(r.config.task)), std::string(to_string(r.config.init)),
                  std::string(to_string(r.config.camera.kind)), std::string(to_string(r.config.controller))};
    groups[key].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    AggregateRow row;
    std::tie(row.task, row.init, row.camera_mode, row.controller) = key;
    std::vector<EpisodeResult> results;
    double steps = 0.0;
    double collisions = 0.0;
    for (const EpisodeRecord* m : members) {
      if (!m->result.valid) {
        ++row.invalid;
        continue;
      }
      results.push_back(m->result);
      steps += static_cast<double>(m->result.steps);
      collisions += static_cast<double>(m->result.collisions);
    }
    row.n = results.size();
    if (row.n > 0) {
      row.success_rate = success_rate(results);
      row.spl = spl(results);
      row.mean_steps = steps / static_cast<double>(row.n);
      row.mean_collisions = collisions / static_cast<double>(row.n);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "task,init,camera_mode,controller,SR,SPL,n,mean_steps,mean_collisions\n";
  for (const auto& r : rows) {
    out += r.task + "," + r.init + "," + r.camera_mode + "," + r.controller + "," + fmt(r.success_rate) + "," +
           fmt(r.spl) + "," + std::to_string(r.n) + "," + fmt(r.mean_steps, 2) + "," + fmt(r.mean_collisions, 2) +
           "\n";
  }
  return out;
}

std::string aggregate_markdown(const std::vector<AggregateRow>& rows) {
  std::string out = "| task | init | camera | controller | SR | SPL | n | steps | collisions | invalid |\n";
  out += "|---|---|---|---|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += "| " + r.task + " | " + r.init + " | " + r.camera_mode + " | " + r.controller + " | " +
           fmt(100.0 * r.success_rate, 1) + " | " + fmt(100.0 * r.spl, 1) + " | " + std::to_string(r.n) + " | " +
           fmt(r.mean_steps, 1) + " | " + fmt(r.mean_collisions, 1) + " | " + std::to_string(r.invalid) + " |\n";
  }
  return out;
}

std::vector<CurvePoint> init_distance_curve(const std::vector<EpisodeRecord>& records, double bucket) {
  if (!(bucket > 0.0)) throw std::invalid_argument("init_distance_curve: bucket must be > 0");
  std::vector<CurvePoint> curve;
  for (const auto& r : records) {
    if (!r.result.valid || r.config.init != InitMode::Off) continue;
    const auto b = static_cast<std::size_t>(std::floor(r.result.init_distance / bucket));
    while (curve.size() <= b) {
      const double lo = static_cast<double>(curve.size()) * bucket;
      curve.push_back({lo, lo + bucket, 0, 0});
    }
    ++curve[b].n;
    if (r.result.success) ++curve[b].successes;
  }
  return curve;
}

std::vector<CurvePoint> smooth_curve(const std::vector<CurvePoint>& curve, std::size_t window) {
  if (window % 2 == 0) throw std::invalid_argument("smooth_curve: window must be odd");
  const std::size_t half = window / 2;
  std::vector<CurvePoint> out(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out[i].lo = curve[i].lo;
    out[i].hi = curve[i].hi;
    const std::size_t from = i >= half ? i - half : 0;
    const std::size_t to = std::min(curve.size() - 1, i + half);
    for (std::size_t k = from; k <= to; ++k) {
      out[i].n += curve[k].n;
      out[i].successes += curve[k].successes;
    }
  }
  return out;
}

const CurvePoint& bucket_at(const std::vector<CurvePoint>& curve, double x) {
  if (curve.empty()) throw std::invalid_argument("bucket_at: empty curve");
  for (const auto& p : curve) {
    if (x >= p.lo && x < p.hi) return p;
  }
  return curve.back();
}

std::vector<CurvePoint> mismatch_curve(const std::vector<EpisodeRecord>& records, SweepParameter parameter) {
  std::map<double, CurvePoint> by_mag;
  for (const auto& r : records) {
    if (!r.result.valid || r.config.camera.kind != CameraModeKind::Sweep) continue;
    if (r.config.camera.parameter != parameter) continue;
    CurvePoint& p = by_mag[r.config.camera.magnitude];
    p.lo = p.hi = r.config.camera.magnitude;
    ++p.n;
    if (r.result.success) ++p.successes;
  }
  std::vector<CurvePoint> out;
  for (const auto& [mag, p] : by_mag) out.push_back(p);
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve, const std::string& x_name) {
  std::string out = x_name + "_lo," + x_name + "_hi,n,successes,SR\n";
  for (const auto& p : curve) {
    out += fmt(p.lo, 3) + "," + fmt(p.hi, 3) + "," + std::to_string(p.n) + "," + std::to_string(p.successes) + "," +
           (p.n ? fmt(p.success_rate()) : std::string("")) + "\n";
  }
  return out;
}

}  // namespace trajguide
