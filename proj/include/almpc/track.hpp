#pragma once

#include <cstdint>
#include <vector>

#include "almpc/errors.hpp"
#include "almpc/vehicle.hpp"

namespace almpc {

/// Piecewise track description: curvature as a function of arc length.
struct TrackSegment {
  enum class Kind { Straight, Arc };
  Kind kind = Kind::Straight;
  double length = 0.0;     // [m]
  double curvature = 0.0;  // [1/m], 0 for straights, signed for arcs
};

struct TrackSpec {
  std::vector<TrackSegment> segments;

  double total_length() const;
  bool valid(double ye_bound = 0.3) const;
};

/// Piecewise-linear reference speed over arc length.
struct SpeedProfile {
  struct Knot {
    double s = 0.0;  // [m]
    double v = 0.0;  // [m/s]
  };
  std::vector<Knot> knots;  // sorted by s
};

/// Headwind disturbance: base + sinusoid + seeded Gaussian noise, clipped.
struct WindProfile {
  double base = 37.5;       // [m/s]
  double amplitude = 12.5;  // [m/s]
  double period = 20.0;     // [s]
  double noise_std = 1.0;   // [m/s]
  std::uint64_t seed = 0;
  double clip_lo = 25.0;
  double clip_hi = 50.0;
};

/// Curvature of the segment containing s; transitions are left-continuous,
/// queries beyond the ends clamp to the first/last segment.
double curvature_at(const TrackSpec& track, double s);

double speed_at(const SpeedProfile& profile, double s);

double wind_at(const WindProfile& profile, double t);

/// Path-frame arc-length progression, explicit Euler over dt.
double advance_arclength(double s, const VehicleState& state, double curvature, double dt);

/// Named preset used by the stock experiments: mixed straights and arcs with
/// both high- and low-curvature corners.
TrackSpec desk_track_v1();
SpeedProfile desk_speed_v1();
WindProfile desk_wind_v1();

}  // namespace almpc
