#include "gricp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "format.hpp"
#include "gricp/random.hpp"

namespace gricp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Candidate {
  double t = kInf;
  Vec3 normal = Vec3::Zero();

  void offer(double t_new, const Vec3& n) {
    if (t_new > 0.0 && t_new < t) {
      t = t_new;
      normal = n;
    }
  }
};

// Slab entry of a ray into an axis-aligned box; the entry face normal points
// back toward the ray origin.
void offer_box(Candidate& best, const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi) {
  double t_enter = -kInf;
  double t_exit = kInf;
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (hi[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_enter) {
      t_enter = t0;
      axis = a;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (axis < 0 || t_enter > t_exit || t_enter <= 0.0) return;
  Vec3 n = Vec3::Zero();
  n[axis] = d[axis] > 0.0 ? -1.0 : 1.0;
  best.offer(t_enter, n);
}

double box_surface_distance(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  // Signed distance to an axis-aligned box.
  const Vec3 c = 0.5 * (lo + hi);
  const Vec3 h = 0.5 * (hi - lo);
  const Vec3 q = (p - c).cwiseAbs() - h;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return std::abs(outside + inside);
}

const char* kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::kTunnel: return "tunnel";
    case SceneKind::kCorridor: return "corridor";
    case SceneKind::kTerrainStrip: return "terrain";
  }
  return "tunnel";
}

SceneKind parse_kind(const std::string& s) {
  if (s == "tunnel") return SceneKind::kTunnel;
  if (s == "corridor") return SceneKind::kCorridor;
  if (s == "terrain") return SceneKind::kTerrainStrip;
  throw Error(ErrorCode::kParse, "unknown scene.kind '" + s + "' (tunnel|corridor|terrain)");
}

}  // namespace

void Scene::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(length) || !positive(width) || !positive(height) || !positive(radius) ||
      !positive(terrain_wavelength) || !positive(density) || !positive(feature_size)) {
    throw Error(ErrorCode::kInvalidArgument, "scene dimensions must be positive");
  }
  if (!(axis_height >= 0.0 && axis_height < radius)) {
    throw Error(ErrorCode::kInvalidArgument, "tunnel axis must lie inside the bore");
  }
  if (!(feature_spacing >= 0.0) || !(terrain_amplitude >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scene feature settings must be non-negative");
  }
}

SceneModel::SceneModel(const Scene& scene) : scene_(scene) {
  scene_.validate();
  Rng rng(derive_seed(scene_.seed, 7));
  for (double& p : phase_) p = rng.uniform(0.0, kTwoPi);
  if (scene_.kind == SceneKind::kTerrainStrip || scene_.feature_spacing <= 0.0) return;

  const double half = scene_.kind == SceneKind::kTunnel
                          ? std::sqrt(scene_.radius * scene_.radius -
                                      scene_.axis_height * scene_.axis_height)
                          : 0.5 * scene_.width;
  const double size = scene_.feature_size;
  const double top = scene_.kind == SceneKind::kTunnel ? scene_.axis_height + 0.5 * scene_.radius
                                                       : 0.6 * scene_.height;
  int side = 1;
  for (double x = 0.5 * scene_.feature_spacing; x + size < scene_.length;
       x += scene_.feature_spacing) {
    const double jitter = rng.uniform(-0.25, 0.25) * scene_.feature_spacing;
    const double x0 = std::clamp(x + jitter, 0.1, scene_.length - size - 0.1);
    const double depth = size * rng.uniform(0.6, 1.2);
    const double h = top * rng.uniform(0.5, 1.0);
    Box b;
    if (side > 0) {
      b.lo = Vec3(x0, half - depth, -1.0);
      b.hi = Vec3(x0 + size, half + scene_.radius + scene_.width, h);
    } else {
      b.lo = Vec3(x0, -half - scene_.radius - scene_.width, -1.0);
      b.hi = Vec3(x0 + size, -half + depth, h);
    }
    features_.push_back(b);
    side = -side;
  }
}

double SceneModel::ground_height(double x, double y) const {
  if (scene_.kind != SceneKind::kTerrainStrip) return 0.0;
  const double a = scene_.terrain_amplitude;
  const double w = kTwoPi / scene_.terrain_wavelength;
  return a * (0.6 * std::sin(w * x + phase_[0]) * std::cos(w / 0.7 * y + phase_[1]) +
              0.4 * std::sin(w / 1.9 * (x + 0.5 * y) + phase_[2]));
}

Vec3 SceneModel::terrain_normal(double x, double y) const {
  const double a = scene_.terrain_amplitude;
  const double w = kTwoPi / scene_.terrain_wavelength;
  const double s1 = w * x + phase_[0];
  const double s2 = w / 0.7 * y + phase_[1];
  const double s3 = w / 1.9 * (x + 0.5 * y) + phase_[2];
  const double fx = a * (0.6 * w * std::cos(s1) * std::cos(s2) + 0.4 * w / 1.9 * std::cos(s3));
  const double fy = a * (-0.6 * w / 0.7 * std::sin(s1) * std::sin(s2) +
                         0.4 * 0.5 * w / 1.9 * std::cos(s3));
  return Vec3(-fx, -fy, 1.0).normalized();
}

bool SceneModel::inside_bore(const Vec3& p, double margin) const {
  if (p.x() < margin || p.x() > scene_.length - margin) return false;
  switch (scene_.kind) {
    case SceneKind::kTunnel: {
      const double dz = p.z() - scene_.axis_height;
      return p.z() > margin &&
             std::sqrt(p.y() * p.y() + dz * dz) < scene_.radius - margin;
    }
    case SceneKind::kCorridor:
      return p.z() > margin && p.z() < scene_.height - margin &&
             std::abs(p.y()) < 0.5 * scene_.width - margin;
    case SceneKind::kTerrainStrip:
      return std::abs(p.y()) < 0.5 * scene_.width - margin &&
             p.z() > ground_height(p.x(), p.y()) + margin;
  }
  return false;
}

bool SceneModel::inside(const Vec3& p, double margin) const {
  if (!inside_bore(p, margin)) return false;
  for (const auto& b : features_) {
    const Vec3 lo = b.lo.array() - margin;
    const Vec3 hi = b.hi.array() + margin;
    if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) return false;
  }
  return true;
}

std::optional<SurfaceHit> SceneModel::raycast(const Vec3& origin, const Vec3& direction,
                                              double max_range) const {
  const Vec3 d = direction.normalized();
  if (scene_.kind == SceneKind::kTerrainStrip) return raycast_terrain(origin, d, max_range);
  return raycast_bore(origin, d, max_range);
}

std::optional<SurfaceHit> SceneModel::raycast_bore(const Vec3& o, const Vec3& d,
                                                   double max_range) const {
  Candidate best;
  if (d.z() < 0.0) best.offer(-o.z() / d.z(), Vec3::UnitZ());
  if (d.x() < 0.0) best.offer(-o.x() / d.x(), Vec3::UnitX());
  if (d.x() > 0.0) best.offer((scene_.length - o.x()) / d.x(), -Vec3::UnitX());

  if (scene_.kind == SceneKind::kTunnel) {
    const double oy = o.y();
    const double oz = o.z() - scene_.axis_height;
    const double a = d.y() * d.y() + d.z() * d.z();
    if (a > 0.0) {
      const double b = oy * d.y() + oz * d.z();
      const double c = oy * oy + oz * oz - scene_.radius * scene_.radius;
      const double disc = b * b - a * c;
      if (disc >= 0.0) {
        const double t = (-b + std::sqrt(disc)) / a;
        const Vec3 hit = o + t * d;
        const Vec3 n(0.0, -hit.y(), -(hit.z() - scene_.axis_height));
        best.offer(t, n.normalized());
      }
    }
  } else {
    const double hw = 0.5 * scene_.width;
    if (d.z() > 0.0) best.offer((scene_.height - o.z()) / d.z(), -Vec3::UnitZ());
    if (d.y() > 0.0) best.offer((hw - o.y()) / d.y(), -Vec3::UnitY());
    if (d.y() < 0.0) best.offer((-hw - o.y()) / d.y(), Vec3::UnitY());
  }
  for (const auto& b : features_) offer_box(best, o, d, b.lo, b.hi);

  if (!(best.t <= max_range)) return std::nullopt;
  return SurfaceHit{best.t, o + best.t * d, best.normal};
}

std::optional<SurfaceHit> SceneModel::raycast_terrain(const Vec3& o, const Vec3& d,
                                                      double max_range) const {
  const double w = kTwoPi / scene_.terrain_wavelength;
  // Bound on |grad f|, so a step of g / (|d_z| + slope * |d_xy|) cannot
  // cross the surface.
  const double slope = scene_.terrain_amplitude * w * (0.6 * (1.0 + 1.0 / 0.7) + 0.4 * 1.5 / 1.9);
  const double denom = std::abs(d.z()) + slope * std::hypot(d.x(), d.y()) + 1e-12;
  auto gap = [&](double t) {
    const Vec3 p = o + t * d;
    return p.z() - ground_height(p.x(), p.y());
  };

  double t0 = 0.0;
  double g0 = gap(0.0);
  if (!(g0 > 0.0)) return std::nullopt;
  while (t0 < max_range) {
    const double t1 = std::min(max_range, t0 + std::max(g0 / denom, 1e-3));
    const double g1 = gap(t1);
    if (g1 <= 0.0) {
      double lo = t0;
      double hi = t1;
      for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
      }
      const double t = 0.5 * (lo + hi);
      Vec3 p = o + t * d;
      if (p.x() < 0.0 || p.x() > scene_.length || std::abs(p.y()) > 0.5 * scene_.width) {
        return std::nullopt;
      }
      return SurfaceHit{t, p, terrain_normal(p.x(), p.y())};
    }
    t0 = t1;
    g0 = g1;
    if (t1 >= max_range) break;
  }
  return std::nullopt;
}

bool SceneModel::on_surface(const Vec3& p, double tol) const {
  if (scene_.kind == SceneKind::kTerrainStrip) {
    return std::abs(p.z() - ground_height(p.x(), p.y())) <= tol;
  }
  for (const auto& b : features_) {
    if (box_surface_distance(p, b.lo, b.hi) <= tol) return true;
  }
  if (std::abs(p.x()) <= tol || std::abs(p.x() - scene_.length) <= tol) return true;
  if (std::abs(p.z()) <= tol) return true;
  if (scene_.kind == SceneKind::kTunnel) {
    const double dz = p.z() - scene_.axis_height;
    return p.z() >= -tol && std::abs(std::sqrt(p.y() * p.y() + dz * dz) - scene_.radius) <= tol;
  }
  return std::abs(p.z() - scene_.height) <= tol ||
         std::abs(std::abs(p.y()) - 0.5 * scene_.width) <= tol;
}

PointCloud SceneModel::sample_surface() const {
  Rng rng(derive_seed(scene_.seed, 11));
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  auto emit = [&](const Vec3& p, const Vec3& n) {
    // Keep only samples that face free space.
    if (inside(p + 1e-6 * n)) {
      points.push_back(p);
      normals.push_back(n);
    }
  };
  auto count_for = [&](double area) {
    return static_cast<std::size_t>(std::llround(area * scene_.density));
  };
  const double len = scene_.length;

  if (scene_.kind == SceneKind::kTerrainStrip) {
    const double w = scene_.width;
    for (std::size_t i = 0, n = count_for(len * w); i < n; ++i) {
      const double x = rng.uniform(0.0, len);
      const double y = rng.uniform(-0.5 * w, 0.5 * w);
      emit(Vec3(x, y, ground_height(x, y)), terrain_normal(x, y));
    }
    return PointCloud(std::move(points), std::move(normals), "world");
  }

  double y_lo = 0.0;
  double y_hi = 0.0;
  double z_hi = 0.0;
  if (scene_.kind == SceneKind::kTunnel) {
    const double r = scene_.radius;
    const double a = scene_.axis_height;
    const double half = std::sqrt(r * r - a * a);
    for (std::size_t i = 0, n = count_for(len * 2.0 * half); i < n; ++i) {
      emit(Vec3(rng.uniform(0.0, len), rng.uniform(-half, half), 0.0), Vec3::UnitZ());
    }
    const double phi0 = -std::asin(a / r);
    const double phi1 = std::numbers::pi - phi0;
    for (std::size_t i = 0, n = count_for(len * r * (phi1 - phi0)); i < n; ++i) {
      const double phi = rng.uniform(phi0, phi1);
      const Vec3 radial(0.0, std::cos(phi), std::sin(phi));
      emit(Vec3(rng.uniform(0.0, len), r * radial.y(), a + r * radial.z()), -radial);
    }
    y_lo = -r;
    y_hi = r;
    z_hi = a + r;
  } else {
    const double hw = 0.5 * scene_.width;
    const double h = scene_.height;
    for (std::size_t i = 0, n = count_for(len * scene_.width); i < n; ++i) {
      const double x = rng.uniform(0.0, len);
      const double y = rng.uniform(-hw, hw);
      emit(Vec3(x, y, 0.0), Vec3::UnitZ());
      emit(Vec3(rng.uniform(0.0, len), rng.uniform(-hw, hw), h), -Vec3::UnitZ());
    }
    for (std::size_t i = 0, n = count_for(len * h); i < n; ++i) {
      emit(Vec3(rng.uniform(0.0, len), hw, rng.uniform(0.0, h)), -Vec3::UnitY());
      emit(Vec3(rng.uniform(0.0, len), -hw, rng.uniform(0.0, h)), Vec3::UnitY());
    }
    y_lo = -hw;
    y_hi = hw;
    z_hi = h;
  }
  // End caps, sampled over the bounding rectangle of the cross-section.
  for (std::size_t i = 0, n = count_for((y_hi - y_lo) * z_hi); i < n; ++i) {
    emit(Vec3(0.0, rng.uniform(y_lo, y_hi), rng.uniform(0.0, z_hi)), Vec3::UnitX());
    emit(Vec3(len, rng.uniform(y_lo, y_hi), rng.uniform(0.0, z_hi)), -Vec3::UnitX());
  }
  for (const auto& b : features_) {
    const Vec3 ext = b.hi - b.lo;
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3;
      const int v = (axis + 2) % 3;
      for (int face = 0; face < 2; ++face) {
        Vec3 n = Vec3::Zero();
        n[axis] = face == 0 ? -1.0 : 1.0;
        for (std::size_t i = 0, cnt = count_for(ext[u] * ext[v]); i < cnt; ++i) {
          Vec3 p;
          p[axis] = face == 0 ? b.lo[axis] : b.hi[axis];
          p[u] = rng.uniform(b.lo[u], b.hi[u]);
          p[v] = rng.uniform(b.lo[v], b.hi[v]);
          emit(p, n);
        }
      }
    }
  }
  return PointCloud(std::move(points), std::move(normals), "world");
}

void SensorModel::validate() const {
  if (!(max_range > 0.0) || !(range_noise_sigma >= 0.0) || points_per_scan == 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid sensor model");
  }
  if (!(min_elevation_deg >= -90.0 && max_elevation_deg <= 90.0 &&
        min_elevation_deg < max_elevation_deg)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid sensor elevation band");
  }
}

void PriorModel::validate() const {
  if (!(odom_translation_noise_sigma >= 0.0) || !(rollpitch_noise_sigma >= 0.0) ||
      !std::isfinite(yaw_drift_per_scan)) {
    throw Error(ErrorCode::kInvalidArgument, "prior noise sigmas must be >= 0");
  }
}

void PathSpec::validate() const {
  if (!(step > 0.0) || !(height > 0.0) || !(lateral_period > 0.0) || !(scan_period > 0.0) ||
      !(attitude_jitter >= 0.0) || !std::isfinite(start_x) || !std::isfinite(lateral_amplitude)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid path specification");
  }
}

std::vector<SyntheticFrame> generate_sequence(const Scene& scene, const PathSpec& path,
                                              const SensorModel& sensor, const PriorModel& prior,
                                              std::size_t n_scans, std::uint64_t seed) {
  path.validate();
  sensor.validate();
  prior.validate();
  const SceneModel model(scene);

  Rng attitude_rng(derive_seed(seed, 1));
  Rng prior_rng(derive_seed(seed, 2));
  const double w = kTwoPi / path.lateral_period;
  const double sin_lo = std::sin(sensor.min_elevation_deg * std::numbers::pi / 180.0);
  const double sin_hi = std::sin(sensor.max_elevation_deg * std::numbers::pi / 180.0);

  std::vector<SyntheticFrame> frames;
  frames.reserve(n_scans);
  for (std::size_t i = 0; i < n_scans; ++i) {
    const double x = path.start_x + static_cast<double>(i) * path.step;
    const double y = path.lateral_amplitude * std::sin(w * x);
    const double z = model.ground_height(x, y) + path.height;
    const Vec3 position(x, y, z);
    if (!model.inside(position, 0.2)) {
      throw Error(ErrorCode::kOutOfScene,
                  "path leaves the scene at scan " + std::to_string(i) + " (x = " +
                      detail::shortest(x) + ")");
    }
    const double yaw = std::atan(path.lateral_amplitude * w * std::cos(w * x));
    const double roll = attitude_rng.gaussian(path.attitude_jitter);
    const double pitch = attitude_rng.gaussian(path.attitude_jitter);
    const RigidTransform truth = RigidTransform::from_euler(roll, pitch, yaw, position);

    Rng scan_rng(derive_seed(seed, 1000 + i));
    std::vector<Vec3> points;
    points.reserve(sensor.points_per_scan);
    const std::size_t max_attempts = 20 * sensor.points_per_scan;
    for (std::size_t attempt = 0;
         attempt < max_attempts && points.size() < sensor.points_per_scan; ++attempt) {
      const double azimuth = scan_rng.uniform(0.0, kTwoPi);
      const double s = scan_rng.uniform(sin_lo, sin_hi);
      const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
      const Vec3 dir_sensor(c * std::cos(azimuth), c * std::sin(azimuth), s);
      const double noise = scan_rng.gaussian(sensor.range_noise_sigma);
      const auto hit = model.raycast(position, truth.rotate(dir_sensor), sensor.max_range);
      if (!hit) continue;
      const double range = hit->range + noise;
      if (range <= 0.0) continue;
      points.push_back(range * dir_sensor);
    }

    SyntheticFrame frame;
    frame.scan = PointCloud(std::move(points), "sensor");
    frame.truth = truth;
    frame.stamp = static_cast<double>(i) * path.scan_period;

    Vec3 prior_position = position;
    if (i > 0) {
      const Vec3 delta = position - frames.back().truth.translation();
      prior_position = frames.back().prior.translation() + delta +
                       Vec3(prior_rng.gaussian(prior.odom_translation_noise_sigma),
                            prior_rng.gaussian(prior.odom_translation_noise_sigma),
                            prior_rng.gaussian(prior.odom_translation_noise_sigma));
    }
    const double prior_roll = roll + prior_rng.gaussian(prior.rollpitch_noise_sigma);
    const double prior_pitch = pitch + prior_rng.gaussian(prior.rollpitch_noise_sigma);
    const double prior_yaw = yaw + static_cast<double>(i) * prior.yaw_drift_per_scan;
    frame.prior = RigidTransform::from_euler(prior_roll, prior_pitch, prior_yaw, prior_position);
    frames.push_back(std::move(frame));
  }
  return frames;
}

PointCloud three_planes_cloud(std::size_t points_per_plane, double extent, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 n = Vec3::Zero();
    n[axis] = 1.0;
    for (std::size_t i = 0; i < points_per_plane; ++i) {
      Vec3 p;
      p[axis] = 0.0;
      p[(axis + 1) % 3] = rng.uniform(0.0, extent);
      p[(axis + 2) % 3] = rng.uniform(0.0, extent);
      points.push_back(p);
      normals.push_back(n);
    }
  }
  return PointCloud(std::move(points), std::move(normals), "world");
}

PointCloud plane_cloud(std::size_t points, double extent, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec3> pts;
  std::vector<Vec3> normals;
  for (std::size_t i = 0; i < points; ++i) {
    pts.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent), 0.0);
    normals.push_back(Vec3::UnitZ());
  }
  return PointCloud(std::move(pts), std::move(normals), "world");
}

// Scenario and benchmark --------------------------------------------------

Scenario::Scenario() {
  mapper.insertion_min_spacing = 0.3;
  mapper.scan_keep_ratio = 0.5;
  mapper.normal_k = 10;
}

std::vector<std::string> mapper_config_keys() {
  return {"icp.mode",          "icp.max_iterations", "icp.trans_epsilon",
          "icp.rot_epsilon",   "match.max_distance", "match.trim_ratio",
          "mapper.min_spacing", "mapper.scan_keep_ratio", "mapper.normal_k",
          "mapper.seed"};
}

MapperConfig mapper_config_from(const KeyValueConfig& cfg, const MapperConfig& base) {
  MapperConfig out = base;
  if (cfg.has("icp.mode")) {
    const auto mode = cfg.get_string("icp.mode", "4dof");
    if (mode == "4dof") {
      out.icp.mode = IcpMode::kFourDof;
    } else if (mode == "6dof") {
      out.icp.mode = IcpMode::kSixDof;
    } else {
      throw Error(ErrorCode::kParse, "icp.mode must be 4dof or 6dof, got '" + mode + "'");
    }
  }
  out.icp.max_iterations = static_cast<int>(cfg.get_int("icp.max_iterations", out.icp.max_iterations));
  out.icp.trans_epsilon = cfg.get_double("icp.trans_epsilon", out.icp.trans_epsilon);
  out.icp.rot_epsilon = cfg.get_double("icp.rot_epsilon", out.icp.rot_epsilon);
  out.icp.match_params.max_distance =
      cfg.get_double("match.max_distance", out.icp.match_params.max_distance);
  out.icp.match_params.trim_ratio =
      cfg.get_double("match.trim_ratio", out.icp.match_params.trim_ratio);
  out.insertion_min_spacing = cfg.get_double("mapper.min_spacing", out.insertion_min_spacing);
  out.scan_keep_ratio = cfg.get_double("mapper.scan_keep_ratio", out.scan_keep_ratio);
  const auto k = cfg.get_int("mapper.normal_k", static_cast<long long>(out.normal_k));
  if (k < 3) throw Error(ErrorCode::kParse, "mapper.normal_k must be at least 3");
  out.normal_k = static_cast<std::size_t>(k);
  const auto seed = cfg.get_int("mapper.seed", static_cast<long long>(out.seed));
  if (seed < 0) throw Error(ErrorCode::kParse, "mapper.seed must be non-negative");
  out.seed = static_cast<std::uint64_t>(seed);
  out.validate();
  return out;
}

std::vector<std::string> Scenario::known_keys() {
  std::vector<std::string> keys = {
      "scene.kind", "scene.length", "scene.width", "scene.height", "scene.radius",
      "scene.axis_height", "scene.feature_spacing", "scene.feature_size",
      "scene.terrain_amplitude", "scene.terrain_wavelength", "scene.density",
      "path.start_x", "path.step", "path.height", "path.lateral_amplitude",
      "path.lateral_period", "path.attitude_jitter", "path.scan_period",
      "sensor.max_range", "sensor.range_noise_sigma", "sensor.points_per_scan",
      "sensor.min_elevation_deg", "sensor.max_elevation_deg",
      "prior.odom_translation_noise_sigma", "prior.yaw_drift_per_scan",
      "prior.rollpitch_noise_sigma", "n_scans"};
  for (auto& k : mapper_config_keys()) keys.push_back(k);
  return keys;
}

Scenario Scenario::from_config(const KeyValueConfig& cfg) {
  cfg.reject_unknown(known_keys());
  Scenario s;
  s.scene.kind = parse_kind(cfg.get_string("scene.kind", kind_name(s.scene.kind)));
  s.scene.length = cfg.get_double("scene.length", s.scene.length);
  s.scene.width = cfg.get_double("scene.width", s.scene.width);
  s.scene.height = cfg.get_double("scene.height", s.scene.height);
  s.scene.radius = cfg.get_double("scene.radius", s.scene.radius);
  s.scene.axis_height = cfg.get_double("scene.axis_height", s.scene.axis_height);
  s.scene.feature_spacing = cfg.get_double("scene.feature_spacing", s.scene.feature_spacing);
  s.scene.feature_size = cfg.get_double("scene.feature_size", s.scene.feature_size);
  s.scene.terrain_amplitude = cfg.get_double("scene.terrain_amplitude", s.scene.terrain_amplitude);
  s.scene.terrain_wavelength = cfg.get_double("scene.terrain_wavelength", s.scene.terrain_wavelength);
  s.scene.density = cfg.get_double("scene.density", s.scene.density);

  s.path.start_x = cfg.get_double("path.start_x", s.path.start_x);
  s.path.step = cfg.get_double("path.step", s.path.step);
  s.path.height = cfg.get_double("path.height", s.path.height);
  s.path.lateral_amplitude = cfg.get_double("path.lateral_amplitude", s.path.lateral_amplitude);
  s.path.lateral_period = cfg.get_double("path.lateral_period", s.path.lateral_period);
  s.path.attitude_jitter = cfg.get_double("path.attitude_jitter", s.path.attitude_jitter);
  s.path.scan_period = cfg.get_double("path.scan_period", s.path.scan_period);

  s.sensor.max_range = cfg.get_double("sensor.max_range", s.sensor.max_range);
  s.sensor.range_noise_sigma = cfg.get_double("sensor.range_noise_sigma", s.sensor.range_noise_sigma);
  const auto pps = cfg.get_int("sensor.points_per_scan", static_cast<long long>(s.sensor.points_per_scan));
  if (pps <= 0) throw Error(ErrorCode::kParse, "sensor.points_per_scan must be positive");
  s.sensor.points_per_scan = static_cast<std::size_t>(pps);
  s.sensor.min_elevation_deg = cfg.get_double("sensor.min_elevation_deg", s.sensor.min_elevation_deg);
  s.sensor.max_elevation_deg = cfg.get_double("sensor.max_elevation_deg", s.sensor.max_elevation_deg);

  s.prior.odom_translation_noise_sigma =
      cfg.get_double("prior.odom_translation_noise_sigma", s.prior.odom_translation_noise_sigma);
  s.prior.yaw_drift_per_scan = cfg.get_double("prior.yaw_drift_per_scan", s.prior.yaw_drift_per_scan);
  s.prior.rollpitch_noise_sigma =
      cfg.get_double("prior.rollpitch_noise_sigma", s.prior.rollpitch_noise_sigma);

  const auto n = cfg.get_int("n_scans", static_cast<long long>(s.n_scans));
  if (n <= 0) throw Error(ErrorCode::kParse, "n_scans must be positive");
  s.n_scans = static_cast<std::size_t>(n);
  s.mapper = mapper_config_from(cfg, s.mapper);
  s.validate();
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path));
}

void Scenario::validate() const {
  scene.validate();
  path.validate();
  sensor.validate();
  prior.validate();
  mapper.validate();
  if (n_scans == 0) throw Error(ErrorCode::kInvalidArgument, "n_scans must be positive");
}

namespace {

ModeRun run_mode(const std::vector<ScanFrame>& frames, const Trajectory& truth,
                 MapperConfig config, IcpMode mode) {
  config.icp.mode = mode;
  const SequenceResult seq = run_sequence(frames, config);
  ModeRun run;
  run.estimate = seq.trajectory;
  run.failures = seq.state.failures.size();
  run.ate = compute_ate(associate(run.estimate, truth, 1e-6), false);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& est = run.estimate[i].pose;
    const auto& prior = frames[i].prior;
    run.max_rollpitch_deviation =
        std::max({run.max_rollpitch_deviation, std::abs(est.roll() - prior.roll()),
                  std::abs(est.pitch() - prior.pitch())});
  }
  return run;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace

DriftReport run_drift_benchmark(const Scenario& scenario, const std::vector<std::uint64_t>& seeds) {
  scenario.validate();
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "benchmark needs at least one seed");

  DriftReport report;
  std::vector<double> ez4;
  std::vector<double> ez6;
  std::vector<double> pooled4;
  std::vector<double> pooled6;
  for (const auto seed : seeds) {
    Scene scene = scenario.scene;
    scene.seed = seed;
    const auto synthetic = generate_sequence(scene, scenario.path, scenario.sensor,
                                             scenario.prior, scenario.n_scans, seed);
    SeedRun run;
    run.seed = seed;
    std::vector<ScanFrame> frames;
    frames.reserve(synthetic.size());
    for (const auto& f : synthetic) {
      frames.push_back({f.scan, f.prior, f.stamp});
      run.truth.append(f.stamp, f.truth);
      run.priors.append(f.stamp, f.prior);
    }
    MapperConfig mapper = scenario.mapper;
    mapper.seed = derive_seed(scenario.mapper.seed, seed);
    run.four_dof = run_mode(frames, run.truth, mapper, IcpMode::kFourDof);
    run.six_dof = run_mode(frames, run.truth, mapper, IcpMode::kSixDof);

    ez4.push_back(run.four_dof.ate.final_abs_z());
    ez6.push_back(run.six_dof.ate.final_abs_z());
    if (ez4.back() < ez6.back()) ++report.wins_4dof;
    pooled4.insert(pooled4.end(), run.four_dof.ate.normalized_percent.begin(),
                   run.four_dof.ate.normalized_percent.end());
    pooled6.insert(pooled6.end(), run.six_dof.ate.normalized_percent.begin(),
                   run.six_dof.ate.normalized_percent.end());
    report.runs.push_back(std::move(run));
  }
  report.median_final_abs_ez_4dof = median(ez4);
  report.median_final_abs_ez_6dof = median(ez6);
  if (!pooled4.empty()) {
    report.pooled_quartiles_4dof = {quantile(pooled4, 0.25), quantile(pooled4, 0.5),
                                    quantile(pooled4, 0.75)};
  }
  if (!pooled6.empty()) {
    report.pooled_quartiles_6dof = {quantile(pooled6, 0.25), quantile(pooled6, 0.5),
                                    quantile(pooled6, 0.75)};
  }
  return report;
}

void write_drift_report(const DriftReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + p.string() + "' for writing");
    return out;
  };
  using detail::shortest;

  for (const auto& run : report.runs) {
    const fs::path seed_dir = dir / ("seed_" + std::to_string(run.seed));
    fs::create_directories(seed_dir);
    write_trajectory(run.truth, seed_dir / "truth.txt");
    write_trajectory(run.priors, seed_dir / "priors.txt");
    write_trajectory(run.four_dof.estimate, seed_dir / "est_4dof.txt");
    write_trajectory(run.six_dof.estimate, seed_dir / "est_6dof.txt");
    {
      auto out = open(seed_dir / "ate_4dof.txt");
      write_ate_series(out, run.four_dof.ate);
    }
    {
      auto out = open(seed_dir / "ate_6dof.txt");
      write_ate_series(out, run.six_dof.ate);
    }
  }

  auto out = open(dir / "report.txt");
  out << "# drift benchmark: 4dof vs 6dof on identical inputs\n";
  out << "# seed final_abs_ez_4dof final_abs_ez_6dof final_ate_4dof final_ate_6dof "
         "failures_4dof failures_6dof max_rollpitch_dev_4dof\n";
  for (const auto& run : report.runs) {
    out << run.seed << ' ' << shortest(run.four_dof.ate.final_abs_z()) << ' '
        << shortest(run.six_dof.ate.final_abs_z()) << ' '
        << shortest(run.four_dof.ate.per_pose.back().e_norm) << ' '
        << shortest(run.six_dof.ate.per_pose.back().e_norm) << ' ' << run.four_dof.failures << ' '
        << run.six_dof.failures << ' ' << shortest(run.four_dof.max_rollpitch_deviation) << '\n';
  }
  out << "seeds = " << report.runs.size() << '\n';
  out << "median_final_abs_ez_4dof = " << shortest(report.median_final_abs_ez_4dof) << '\n';
  out << "median_final_abs_ez_6dof = " << shortest(report.median_final_abs_ez_6dof) << '\n';
  out << "wins_4dof = " << report.wins_4dof << '\n';
  out << "normalized_ate_quartiles_4dof_percent = " << shortest(report.pooled_quartiles_4dof[0])
      << ' ' << shortest(report.pooled_quartiles_4dof[1]) << ' '
      << shortest(report.pooled_quartiles_4dof[2]) << '\n';
  out << "normalized_ate_quartiles_6dof_percent = " << shortest(report.pooled_quartiles_6dof[0])
      << ' ' << shortest(report.pooled_quartiles_6dof[1]) << ' '
      << shortest(report.pooled_quartiles_6dof[2]) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing benchmark report");
}

void write_sequence(const std::vector<SyntheticFrame>& frames, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scans");
  Trajectory priors;
  Trajectory truth;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.ply", i);
    write_cloud(frames[i].scan, dir / "scans" / name);
    priors.append(frames[i].stamp, frames[i].prior);
    truth.append(frames[i].stamp, frames[i].truth);
  }
  write_trajectory(priors, dir / "priors.txt");
  write_trajectory(truth, dir / "truth.txt");
}

}  // namespace gricp
