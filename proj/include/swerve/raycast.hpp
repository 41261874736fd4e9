#pragma once

// Depth sensing. cast_rays produces the 170-ray frontal scan the policy
// consumes; shape_scan converts an arbitrary-resolution 360-degree range list
// (dropouts, spikes and all) into the same shape.
//
// Ray convention: index 0 points 45 degrees to the right of the heading
// (-45 deg), index 169 points 45 degrees to the left (+45 deg), uniform
// increments of 90/169 degrees inclusive of both endpoints. 170 is even, so
// no ray lies exactly on the heading; index 85 is the documented center ray.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swerve/dynamics.hpp"
#include "swerve/geometry.hpp"
#include "swerve/scene.hpp"

namespace swerve {

inline constexpr int kScanRays = 170;
inline constexpr double kScanFov = std::numbers::pi / 2.0;

struct DepthScan {
  std::array<double, kScanRays> ranges{};  // each in [0,1]; 1.0 = no hit
  double max_range = 10.0;                 // m

  static double ray_angle_offset(int i) {
    return -kScanFov / 2.0 + kScanFov * i / (kScanRays - 1);
  }
};

inline DepthScan cast_rays(const VehicleState& ego, const SceneGeometry& scene,
                           const std::vector<std::pair<VehicleState, Footprint>>& others,
                           double max_range) {
  if (!state_is_finite(ego)) throw std::domain_error("cast_rays: non-finite ego pose");
  if (!(max_range > 0.0)) throw std::domain_error("cast_rays: max_range must be positive");

  const Vec2 origin = ego.position();

  // One coarse pass over the scene rejects everything out of sensor reach, so
  // the 170 rays only test nearby geometry.
  std::vector<const Segment*> candidates;
  candidates.reserve(64);
  for (const Segment& s : scene.boundary_segments) {
    if (point_segment_distance(origin, s) <= max_range) candidates.push_back(&s);
  }
  std::vector<std::array<Segment, 4>> other_edges;
  other_edges.reserve(others.size());
  for (const auto& [state, fp] : others) {
    const double reach = max_range + std::hypot(fp.half_length, fp.half_width);
    if (distance(origin, state.position()) <= reach) {
      other_edges.push_back(footprint_box(state, fp).edges());
    }
  }

  DepthScan scan;
  scan.max_range = max_range;
  for (int i = 0; i < kScanRays; ++i) {
    const double angle = ego.yaw + DepthScan::ray_angle_offset(i);
    const Vec2 dir = {std::cos(angle), std::sin(angle)};
    double best = max_range;
    for (const Segment* s : candidates) {
      if (const auto t = ray_segment_hit(origin, dir, *s); t && *t < best) best = *t;
    }
    for (const auto& edges : other_edges) {
      for (const Segment& s : edges) {
        if (const auto t = ray_segment_hit(origin, dir, s); t && *t < best) best = *t;
      }
    }
    scan.ranges[i] = best / max_range;
  }
  return scan;
}

namespace detail {

// Invalid raw readings: non-finite, non-positive (lidar dropout marker), or
// beyond the sensor range.
inline bool raw_reading_valid(double v, double max_range) {
  return std::isfinite(v) && v > 0.0 && v <= max_range;
}

}  // namespace detail

// Shapes a full-circle range list into the frontal scan:
//  1. extract the 90-degree sector around `ego_heading_index`,
//  2. replace invalid readings and isolated spikes (> 3x off from both
//     neighbors) by linear interpolation between the nearest valid readings,
//  3. uniformly downsample (nearest index) to 170 entries,
//  4. normalize by max_range.
// Throws if the frontal sector contains no usable reading.
inline DepthScan shape_scan(const std::vector<double>& raw, std::size_t ego_heading_index,
                            double max_range) {
  if (raw.empty()) throw std::runtime_error("shape_scan: empty scan");
  if (!(max_range > 0.0)) throw std::domain_error("shape_scan: max_range must be positive");
  const std::size_t n = raw.size();

  // Gather the frontal sector ordered right-to-left, matching the cast_rays
  // index convention. The window is half-open [-45 deg, +45 deg) so that a
  // raw resolution of exactly k x 170 downsamples by selecting every k-th
  // entry.
  struct SectorEntry {
    double angle;
    double value;
  };
  std::vector<SectorEntry> sector;
  sector.reserve(n / 4 + 2);
  for (std::size_t k = 0; k < n; ++k) {
    const double rel = wrap_angle(static_cast<double>(static_cast<std::ptrdiff_t>(k) -
                                                      static_cast<std::ptrdiff_t>(ego_heading_index)) *
                                  2.0 * std::numbers::pi / static_cast<double>(n));
    if (rel >= -kScanFov / 2.0 - 1e-12 && rel < kScanFov / 2.0 - 1e-12) {
      sector.push_back({rel, raw[k]});
    }
  }
  std::sort(sector.begin(), sector.end(),
            [](const SectorEntry& a, const SectorEntry& b) { return a.angle < b.angle; });
  const std::size_t m = sector.size();
  if (m == 0) throw std::runtime_error("shape_scan: frontal sector empty");

  std::vector<double> values(m);
  std::vector<bool> valid(m);
  for (std::size_t i = 0; i < m; ++i) {
    values[i] = sector[i].value;
    valid[i] = detail::raw_reading_valid(values[i], max_range);
  }

  // Spike filter: a reading more than 3x away from both immediate valid
  // neighbors is sensor noise, not structure.
  std::vector<bool> keep = valid;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (!valid[i] || !valid[i - 1] || !valid[i + 1]) continue;
    const double r = values[i], a = values[i - 1], b = values[i + 1];
    const bool high = r > 3.0 * a && r > 3.0 * b;
    const bool low = r < a / 3.0 && r < b / 3.0;
    if (high || low) keep[i] = false;
  }

  std::size_t n_valid = 0;
  for (std::size_t i = 0; i < m; ++i) n_valid += keep[i] ? 1 : 0;
  if (n_valid == 0) throw std::runtime_error("shape_scan: frontal sector has no valid readings");

  // Fill invalid runs by linear interpolation between the nearest valid
  // readings; runs touching the sector edge extend the nearest valid value.
  std::vector<double> filled = values;
  std::size_t i = 0;
  while (i < m) {
    if (keep[i]) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < m && !keep[run_end]) ++run_end;
    const bool has_left = i > 0;
    const bool has_right = run_end < m;
    for (std::size_t j = i; j < run_end; ++j) {
      if (has_left && has_right) {
        const double t =
            static_cast<double>(j - (i - 1)) / static_cast<double>(run_end - (i - 1));
        filled[j] = filled[i - 1] + t * (values[run_end] - filled[i - 1]);
      } else if (has_left) {
        filled[j] = filled[i - 1];
      } else {
        filled[j] = values[run_end];
      }
    }
    i = run_end;
  }

  DepthScan scan;
  scan.max_range = max_range;
  for (int j = 0; j < kScanRays; ++j) {
    const std::size_t src = (static_cast<std::size_t>(j) * m) / kScanRays;
    scan.ranges[j] = std::clamp(filled[src] / max_range, 0.0, 1.0);
  }
  return scan;
}

}  // namespace swerve
