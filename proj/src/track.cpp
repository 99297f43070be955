#include "almpc/track.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace almpc {

double TrackSpec::total_length() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.length;
  return total;
}

bool TrackSpec::valid(double ye_bound) const {
  if (segments.empty()) return false;
  for (const auto& seg : segments) {
    if (seg.length <= 0.0) return false;
    if (std::abs(seg.curvature) * ye_bound >= 1.0) return false;
  }
  return true;
}

double curvature_at(const TrackSpec& track, double s) {
  if (track.segments.empty()) return 0.0;
  if (s <= 0.0) return track.segments.front().curvature;
  double end = 0.0;
  for (const auto& seg : track.segments) {
    end += seg.length;
    if (s <= end) return seg.curvature;
  }
  return track.segments.back().curvature;
}

double speed_at(const SpeedProfile& profile, double s) {
  const auto& kn = profile.knots;
  if (kn.empty()) return 0.0;
  if (s <= kn.front().s) return kn.front().v;
  if (s >= kn.back().s) return kn.back().v;
  for (std::size_t i = 1; i < kn.size(); ++i) {
    if (s <= kn[i].s) {
      const double span = kn[i].s - kn[i - 1].s;
      if (span <= 0.0) return kn[i].v;
      const double w = (s - kn[i - 1].s) / span;
      return kn[i - 1].v + w * (kn[i].v - kn[i - 1].v);
    }
  }
  return kn.back().v;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stateless standard normal draw keyed on (seed, time bucket), so wind_at is
// a pure function of its arguments and reproducible for any query order.
double keyed_normal(std::uint64_t seed, std::uint64_t key) {
  const std::uint64_t h1 = splitmix64(seed ^ splitmix64(key));
  const std::uint64_t h2 = splitmix64(h1);
  const double u1 = (static_cast<double>(h1 >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = (static_cast<double>(h2 >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double wind_at(const WindProfile& profile, double t) {
  double w = profile.base;
  if (profile.period > 0.0) {
    w += profile.amplitude * std::sin(2.0 * std::numbers::pi * t / profile.period);
  }
  if (profile.noise_std > 0.0) {
    // quantize t to 1 ms so the noise stream is well defined at any t
    const auto key = static_cast<std::uint64_t>(std::llround(t * 1000.0));
    w += profile.noise_std * keyed_normal(profile.seed, key);
  }
  return std::clamp(w, profile.clip_lo, profile.clip_hi);
}

double advance_arclength(double s, const VehicleState& state, double curvature, double dt) {
  const double denom = 1.0 - state.ye * curvature;
  if (std::abs(denom) <= 1e-6) {
    throw SingularGeometry("advance_arclength: 1 - ye*k is singular");
  }
  const double s_dot =
      (state.vx * std::cos(state.theta_e) - state.vy * std::sin(state.theta_e)) / denom;
  return s + dt * s_dot;
}

TrackSpec desk_track_v1() {
  using Kind = TrackSegment::Kind;
  constexpr double pi = std::numbers::pi;
  TrackSpec t;
  t.segments = {
      {Kind::Straight, 150.0, 0.0},
      {Kind::Arc, 40.0 * pi / 2.0, 1.0 / 40.0},    // R=40 m, 90 deg left
      {Kind::Straight, 80.0, 0.0},
      {Kind::Arc, 25.0 * pi, -1.0 / 25.0},         // R=25 m, 180 deg right
      {Kind::Straight, 100.0, 0.0},
      {Kind::Arc, 60.0 * 2.0 * pi / 3.0, 1.0 / 60.0},  // R=60 m, 120 deg left
      {Kind::Straight, 120.0, 0.0},
  };
  return t;
}

SpeedProfile desk_speed_v1() {
  // Straights run 18-21 m/s, the tightest arc drops to 5.5 m/s; ramps keep
  // the required acceleration within about +/-3 m/s^2.
  SpeedProfile p;
  p.knots = {
      {0.0, 18.0},   {50.0, 20.0},  {90.0, 20.0},  {150.0, 9.0},
      {212.8, 9.0},  {250.0, 14.0}, {292.8, 5.5},  {371.4, 5.5},
      {440.0, 13.0}, {471.4, 12.0}, {597.0, 12.0}, {680.0, 19.0},
      {717.0, 19.0},
  };
  return p;
}

WindProfile desk_wind_v1() {
  WindProfile w;
  w.base = 37.5;
  w.amplitude = 12.5;
  w.period = 20.0;
  w.noise_std = 1.0;
  w.seed = 0;
  return w;
}

}  // namespace almpc
