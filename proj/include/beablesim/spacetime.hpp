#pragma once

#include <optional>
#include <string>

#include "beablesim/geometry.hpp"

namespace beablesim {

/// The single preferred frame of the simulation.  Only the light speed is
/// configurable; all library internals work in natural units c = 1 and the
/// configuration layer converts on input/output.
struct Frame {
  double c = 1.0;
};

/// A spacetime point (t; x, y, z) in the preferred frame.
struct Event {
  double t = 0.0;
  Vec3 r{};
};

enum class DetectionKind { Position, Momentum };

/// One click of the fictitious late-time detector on the plane t = T.
/// Position detections carry a plane point; momentum detections carry a
/// momentum vector instead (the position field is unused then).
struct DetectionEvent {
  Vec3 position{};
  double plane_time = 0.0;
  DetectionKind kind = DetectionKind::Position;
  std::optional<Vec3> momentum{};
  std::string photon_id = "0";
};

enum class CausalClass {
  TimelikeFuture,
  TimelikePast,
  LightlikeFuture,
  LightlikePast,
  Spacelike,
};

const char* to_string(CausalClass c);

/// Relative tolerance for deciding lightlike/boundary cases.  The absolute
/// tolerance used by the cone tests is kConeRelTol * c * time_scale, with
/// time_scale = plane time T where one is available.
inline constexpr double kConeRelTol = 1e-9;

double cone_tolerance(const Frame& frame, double time_scale);

/// Classifies event b relative to event a.  Lightlike is decided within
/// cone_tolerance at the time scale max(|a.t|, |b.t|, |b.t - a.t|).
CausalClass causal_class(const Event& a, const Event& b, const Frame& frame);

/// True iff the detection lies outside (or, within tolerance, exactly on)
/// the future light cone of x.  A click on the boundary counts as outside,
/// so a beable transition pinned by a click at radius c(T - t0) happens at
/// t >= t0 inclusive.  Throws if the detection plane is in the causal past
/// of x.
bool is_outside_future_lightcone(const Event& x, const DetectionEvent& d, const Frame& frame);

/// Unit vector from x toward the detection point.  Throws on coincident
/// points.
Vec3 asymptotic_direction(const Event& x, const DetectionEvent& d);

struct TransitionTimes {
  double exact;       ///< T - |detection - r_minus| / c
  double asymptotic;  ///< t - n . (r_plus - r_minus) / c
};

/// Correlated transition time at the distant site r_minus for a detection
/// that is lightlike-separated from (t, r_plus).  The exact value converges
/// to the asymptotic one as T grows at fixed t, with error O(1/T).
TransitionTimes correlated_transition_time(double t, const DetectionEvent& detection,
                                           const Vec3& r_plus, const Vec3& r_minus,
                                           const Frame& frame);

}  // namespace beablesim
