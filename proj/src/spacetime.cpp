#include "beablesim/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace beablesim {

std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::TimelikeFuture: return "timelike-future";
    case CausalClass::TimelikePast: return "timelike-past";
    case CausalClass::LightlikeFuture: return "lightlike-future";
    case CausalClass::LightlikePast: return "lightlike-past";
    case CausalClass::Spacelike: return "spacelike";
  }
  return "?";
}

double cone_tolerance(const Frame& frame, double time_scale) {
  return kConeRelTol * frame.c * std::abs(time_scale);
}

CausalClass causal_class(const Event& a, const Event& b, const Frame& frame) {
  const double dt = b.t - a.t;
  const double dist = norm(b.r - a.r);
  const double cdt = frame.c * dt;
  const double scale = std::max({std::abs(a.t), std::abs(b.t), std::abs(dt)});
  const double eps = cone_tolerance(frame, scale);

  if (std::abs(std::abs(cdt) - dist) <= eps) {
    return dt >= 0.0 ? CausalClass::LightlikeFuture : CausalClass::LightlikePast;
  }
  if (std::abs(cdt) > dist) {
    return dt > 0.0 ? CausalClass::TimelikeFuture : CausalClass::TimelikePast;
  }
  return CausalClass::Spacelike;
}

bool is_outside_future_lightcone(const Event& x, const DetectionEvent& d, const Frame& frame) {
  const double eps = cone_tolerance(frame, d.plane_time);
  if (d.plane_time < x.t - eps / frame.c) {
    throw std::invalid_argument("is_outside_future_lightcone: detection plane precedes query time");
  }
  const double dist = norm(d.position - x.r);
  const double cone_radius = frame.c * (d.plane_time - x.t);
  // Boundary counts as outside: the transition pinned by a click happens at
  // t >= t0 inclusive.
  return dist >= cone_radius - eps;
}

Vec3 asymptotic_direction(const Event& x, const DetectionEvent& d) {
  const Vec3 sep = d.position - x.r;
  const double n = norm(sep);
  if (n <= 0.0) {
    throw std::invalid_argument("asymptotic_direction: coincident points");
  }
  return sep / n;
}

TransitionTimes correlated_transition_time(double t, const DetectionEvent& detection,
                                           const Vec3& r_plus, const Vec3& r_minus,
                                           const Frame& frame) {
  const double T = detection.plane_time;
  const double eps = cone_tolerance(frame, T);
  const double r_from_plus = norm(detection.position - r_plus);
  if (std::abs(r_from_plus - frame.c * (T - t)) > eps) {
    throw std::invalid_argument(
        "correlated_transition_time: detection not lightlike-separated from (t, r_plus)");
  }
  const Vec3 n = asymptotic_direction(Event{t, r_plus}, detection);
  TransitionTimes out{};
  out.exact = T - norm(detection.position - r_minus) / frame.c;
  out.asymptotic = t - dot(n, r_plus - r_minus) / frame.c;
  return out;
}

}  // namespace beablesim
