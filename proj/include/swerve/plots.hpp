#pragma once

// Trajectory exports: per-trial CSV in the trajectory-log schema and a small
// SVG per trial showing the scene outline with time-color-graded paths
// (ego green, obstacle red; brightness increases monotonically with time).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "swerve/geometry.hpp"
#include "swerve/scenario.hpp"
#include "swerve/scene.hpp"

namespace swerve {

// Color ramp value for normalized time t in [0, 1]; strictly increasing.
inline int color_grade(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return 60 + static_cast<int>(std::lround(t * 195.0));
}

inline void write_trial_csv(const TrialResult& trial, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("plots: cannot write '" + path + "'");
  out << "step,agent_id,x,y,yaw,v,throttle,steer,reward,termination\n";
  out.precision(17);
  const char* term = trial.outcome == TrialOutcome::Success
                         ? "success"
                         : (trial.outcome == TrialOutcome::Collision ? "collision" : "timeout");
  for (const TrajectoryPoint& pt : trial.trajectory) {
    const char* row_term = (pt.step == trial.steps - 1) ? term : "running";
    out << pt.step << ",0," << pt.ego.x << ',' << pt.ego.y << ',' << pt.ego.yaw << ','
        << pt.ego.v << ',' << pt.throttle << ',' << pt.steer << ",0," << row_term << '\n';
    out << pt.step << ",1," << pt.obstacle.x << ',' << pt.obstacle.y << ',' << pt.obstacle.yaw
        << ',' << pt.obstacle.v << ",0,0,0," << row_term << '\n';
  }
}

inline void write_trial_svg(const TrialResult& trial, const SceneGeometry& scene,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("plots: cannot write '" + path + "'");

  // view bounds from scene + trajectory
  double min_x = -1, max_x = 1, min_y = -1, max_y = 1;
  auto grow = [&](const Vec2& p) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const Segment& s : scene.boundary_segments) {
    grow(s.a);
    grow(s.b);
  }
  for (const TrajectoryPoint& pt : trial.trajectory) {
    grow(pt.ego.position());
    grow(pt.obstacle.position());
  }
  const double pad = 1.0;
  min_x -= pad;
  min_y -= pad;
  max_x += pad;
  max_y += pad;
  const double scale = 600.0 / std::max(max_x - min_x, max_y - min_y);
  const double w = (max_x - min_x) * scale, h = (max_y - min_y) * scale;
  auto sx = [&](double x) { return (x - min_x) * scale; };
  auto sy = [&](double y) { return h - (y - min_y) * scale; };  // y up

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const Segment& s : scene.boundary_segments) {
    out << "<line x1=\"" << sx(s.a.x) << "\" y1=\"" << sy(s.a.y) << "\" x2=\"" << sx(s.b.x)
        << "\" y2=\"" << sy(s.b.y) << "\" stroke=\"#444\" stroke-width=\"2\"/>\n";
  }

  const std::size_t n = trial.trajectory.size();
  auto draw_path = [&](bool ego) {
    for (std::size_t i = 1; i < n; ++i) {
      const Vec2 a = ego ? trial.trajectory[i - 1].ego.position()
                         : trial.trajectory[i - 1].obstacle.position();
      const Vec2 b =
          ego ? trial.trajectory[i].ego.position() : trial.trajectory[i].obstacle.position();
      const int g = color_grade(n > 1 ? static_cast<double>(i) / (n - 1) : 1.0);
      char color[16];
      if (ego) {
        std::snprintf(color, sizeof(color), "#00%02x00", g);
      } else {
        std::snprintf(color, sizeof(color), "#%02x0000", g);
      }
      out << "<line x1=\"" << sx(a.x) << "\" y1=\"" << sy(a.y) << "\" x2=\"" << sx(b.x)
          << "\" y2=\"" << sy(b.y) << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    }
  };
  draw_path(false);  // obstacle in red underneath
  draw_path(true);   // ego in green on top
  out << "</svg>\n";
}

}  // namespace swerve
