#pragma once

// Static scene geometry: boundary segments, drivable regions, spawn poses and
// (for racetracks) a closed centerline with per-point lane half-width.
// Scenes load from/save to a line-oriented text format; two builders produce
// the bundled `racetrack` and `intersection` scenes.
//
// File format (one record per line, '#' starts a comment):
//   scene <name>
//   segment <ax> <ay> <bx> <by>
//   polygon <n> <x1> <y1> ... <xn> <yn>
//   spawn <name> <x> <y> <yaw>
//   centerline <closed|open>
//   cpoint <x> <y> <half_width>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swerve/dynamics.hpp"
#include "swerve/geometry.hpp"

namespace swerve {

struct SpawnPose {
  std::string name;
  Vec2 p;
  double yaw = 0.0;
};

struct CenterPoint {
  Vec2 p;
  double half_width = 0.0;
};

struct SceneGeometry {
  std::string name;
  std::vector<Segment> boundary_segments;
  std::vector<Polygon> drivable_regions;
  std::vector<SpawnPose> spawn_poses;
  std::vector<CenterPoint> track_centerline;  // empty when the scene has no track
  bool centerline_closed = false;

  bool has_centerline() const { return !track_centerline.empty(); }
};

struct Footprint {
  double half_length = 0.25;  // m
  double half_width = 0.15;   // m
};

inline OrientedBox footprint_box(const VehicleState& s, const Footprint& f) {
  return OrientedBox{{s.x, s.y}, s.yaw, f.half_length, f.half_width};
}

// Oriented-rectangle overlap, symmetric in its arguments.
inline bool detect_collision(const VehicleState& a, const Footprint& fa,
                             const VehicleState& b, const Footprint& fb) {
  if (!state_is_finite(a) || !state_is_finite(b)) {
    throw std::domain_error("detect_collision: non-finite pose");
  }
  return boxes_overlap(footprint_box(a, fa), footprint_box(b, fb));
}

// True iff the vehicle center lies outside every drivable region.
// Region boundaries count as drivable.
inline bool off_track(const VehicleState& state, const SceneGeometry& scene) {
  if (!state_is_finite(state)) throw std::domain_error("off_track: non-finite pose");
  const Vec2 p = state.position();
  for (const Polygon& poly : scene.drivable_regions) {
    if (point_in_convex_polygon(p, poly)) return false;
  }
  return true;
}

inline void validate_scene(const SceneGeometry& scene) {
  for (const Segment& s : scene.boundary_segments) {
    if (s.length() <= 0.0) throw std::runtime_error("scene: zero-length boundary segment");
  }
  if (scene.has_centerline() && scene.track_centerline.size() < 3 && scene.centerline_closed) {
    throw std::runtime_error("scene: closed centerline needs at least 3 points");
  }
}

inline SceneGeometry load_scene_stream(std::istream& in) {
  SceneGeometry scene;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("scene: line " + std::to_string(lineno) + ": " + what);
    };
    if (kind == "scene") {
      if (!(ls >> scene.name)) fail("expected scene name");
    } else if (kind == "segment") {
      Segment s;
      if (!(ls >> s.a.x >> s.a.y >> s.b.x >> s.b.y)) fail("malformed segment");
      scene.boundary_segments.push_back(s);
    } else if (kind == "polygon") {
      std::size_t n = 0;
      if (!(ls >> n) || n < 3) fail("malformed polygon");
      Polygon poly;
      poly.pts.resize(n);
      for (auto& pt : poly.pts) {
        if (!(ls >> pt.x >> pt.y)) fail("polygon vertex count mismatch");
      }
      scene.drivable_regions.push_back(std::move(poly));
    } else if (kind == "spawn") {
      SpawnPose sp;
      if (!(ls >> sp.name >> sp.p.x >> sp.p.y >> sp.yaw)) fail("malformed spawn");
      scene.spawn_poses.push_back(sp);
    } else if (kind == "centerline") {
      std::string mode;
      if (!(ls >> mode) || (mode != "closed" && mode != "open")) fail("centerline closed|open");
      scene.centerline_closed = (mode == "closed");
    } else if (kind == "cpoint") {
      CenterPoint cp;
      if (!(ls >> cp.p.x >> cp.p.y >> cp.half_width)) fail("malformed cpoint");
      scene.track_centerline.push_back(cp);
    } else {
      fail("unknown record '" + kind + "'");
    }
  }
  validate_scene(scene);
  return scene;
}

inline SceneGeometry load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scene: cannot open '" + path + "'");
  return load_scene_stream(in);
}

inline void save_scene(const SceneGeometry& scene, std::ostream& out) {
  out.precision(17);
  out << "scene " << scene.name << "\n";
  for (const Segment& s : scene.boundary_segments) {
    out << "segment " << s.a.x << " " << s.a.y << " " << s.b.x << " " << s.b.y << "\n";
  }
  for (const Polygon& poly : scene.drivable_regions) {
    out << "polygon " << poly.pts.size();
    for (const Vec2& p : poly.pts) out << " " << p.x << " " << p.y;
    out << "\n";
  }
  for (const SpawnPose& sp : scene.spawn_poses) {
    out << "spawn " << sp.name << " " << sp.p.x << " " << sp.p.y << " " << sp.yaw << "\n";
  }
  if (scene.has_centerline()) {
    out << "centerline " << (scene.centerline_closed ? "closed" : "open") << "\n";
    for (const CenterPoint& cp : scene.track_centerline) {
      out << "cpoint " << cp.p.x << " " << cp.p.y << " " << cp.half_width << "\n";
    }
  }
}

inline void save_scene(const SceneGeometry& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("scene: cannot write '" + path + "'");
  save_scene(scene, out);
}

// Stadium-shaped closed loop: two straights joined by semicircular arcs,
// traversed counter-clockwise. Lane half-width is several car widths so that
// overtaking is geometrically possible.
inline SceneGeometry make_racetrack_scene(double straight_len = 18.0, double radius = 6.0,
                                          double half_width = 1.5, double step = 1.0) {
  SceneGeometry scene;
  scene.name = "racetrack";
  scene.centerline_closed = true;

  struct Node {
    Vec2 p;
    Vec2 tangent;
  };
  std::vector<Node> nodes;
  const double hx = straight_len / 2.0;

  const int n_straight = std::max(2, static_cast<int>(std::round(straight_len / step)));
  const int n_arc = std::max(4, static_cast<int>(std::round(std::numbers::pi * radius / step)));

  // bottom straight, left to right
  for (int i = 0; i < n_straight; ++i) {
    const double x = -hx + straight_len * i / n_straight;
    nodes.push_back({{x, -radius}, {1.0, 0.0}});
  }
  // right arc, -90 deg to +90 deg around (hx, 0)
  for (int i = 0; i < n_arc; ++i) {
    const double a = -std::numbers::pi / 2 + std::numbers::pi * i / n_arc;
    nodes.push_back({{hx + radius * std::cos(a), radius * std::sin(a)},
                     {-std::sin(a), std::cos(a)}});
  }
  // top straight, right to left
  for (int i = 0; i < n_straight; ++i) {
    const double x = hx - straight_len * i / n_straight;
    nodes.push_back({{x, radius}, {-1.0, 0.0}});
  }
  // left arc, +90 deg to +270 deg around (-hx, 0)
  for (int i = 0; i < n_arc; ++i) {
    const double a = std::numbers::pi / 2 + std::numbers::pi * i / n_arc;
    nodes.push_back({{-hx + radius * std::cos(a), radius * std::sin(a)},
                     {-std::sin(a), std::cos(a)}});
  }

  const std::size_t n = nodes.size();
  std::vector<Vec2> inner(n), outer(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 left = perp_left(nodes[i].tangent);  // CCW loop: left side is the interior
    inner[i] = nodes[i].p + left * half_width;
    outer[i] = nodes[i].p - left * half_width;
    scene.track_centerline.push_back({nodes[i].p, half_width});
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    scene.boundary_segments.push_back({inner[i], inner[j]});
    scene.boundary_segments.push_back({outer[i], outer[j]});
    scene.drivable_regions.push_back({{inner[i], inner[j], outer[j], outer[i]}});
  }
  // Spawn poses every few nodes, heading along the exact local tangent.
  for (std::size_t i = 0; i < n; i += 3) {
    scene.spawn_poses.push_back({"cl_" + std::to_string(i), nodes[i].p,
                                 std::atan2(nodes[i].tangent.y, nodes[i].tangent.x)});
  }
  return scene;
}

// Two perpendicular roads crossing at the origin, open at all four ends.
inline SceneGeometry make_intersection_scene(double road_half_width = 1.2,
                                             double arm_length = 15.0) {
  SceneGeometry scene;
  scene.name = "intersection";
  const double w = road_half_width, l = arm_length;

  // Road edges stop at the crossing so all four mouths stay open.
  scene.boundary_segments = {
      {{-w, w}, {-w, l}},   {{w, w}, {w, l}},      // north arm edges
      {{-w, -l}, {-w, -w}}, {{w, -l}, {w, -w}},    // south arm edges
      {{w, w}, {l, w}},     {{w, -w}, {l, -w}},    // east arm edges
      {{-l, w}, {-w, w}},   {{-l, -w}, {-w, -w}},  // west arm edges
  };
  scene.drivable_regions = {
      {{{-w, -l}, {w, -l}, {w, l}, {-w, l}}},  // north-south road
      {{{-l, -w}, {l, -w}, {l, w}, {-l, w}}},  // east-west road
  };
  scene.spawn_poses = {
      {"ego_south", {0.0, -6.0}, std::numbers::pi / 2},
      {"obs_east", {6.0, 0.0}, std::numbers::pi},
      {"obs_north", {0.0, 6.0}, -std::numbers::pi / 2},
      {"obs_west", {-6.0, 0.0}, 0.0},
  };
  return scene;
}

// Resolves a scene spec that is either a file path or a builtin name.
inline SceneGeometry resolve_scene(const std::string& spec) {
  if (spec == "racetrack") return make_racetrack_scene();
  if (spec == "intersection") return make_intersection_scene();
  return load_scene(spec);
}

}  // namespace swerve
