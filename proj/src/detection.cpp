#include "beablesim/detection.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beablesim {

namespace {

constexpr double kPi = std::numbers::pi;

// Orthonormal basis completing the axis, for mapping (theta, phi) draws to
// directions about an arbitrary dipole axis.
void axis_frame(const Vec3& axis, Vec3& e1, Vec3& e2) {
  const Vec3 a = normalized(axis);
  const Vec3 helper = std::abs(a.z) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
  e1 = normalized(cross(helper, a));
  e2 = cross(a, e1);
}

double amplitude_weight(std::complex<double> alpha, std::complex<double> beta) {
  const double total = std::norm(alpha) + std::norm(beta);
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("amplitudes not normalised: |alpha|^2 + |beta|^2 != 1");
  }
  return std::norm(alpha);
}

DetectionEvent make_click(const Vec3& source_pos, double radius, const Vec3& dir, double T,
                          const std::string& photon_id) {
  DetectionEvent d;
  d.position = source_pos + radius * dir;
  d.plane_time = T;
  d.kind = DetectionKind::Position;
  d.photon_id = photon_id;
  return d;
}

}  // namespace

void validate(const DetectorPlane& plane) {
  if (plane.T <= 0.0) throw std::invalid_argument("DetectorPlane: T must be > 0");
  if (plane.mode == PlaneMode::Grid) {
    if (plane.cell_size <= 0.0)
      throw std::invalid_argument("DetectorPlane: grid mode requires cell_size > 0");
    if (plane.cutoff_freq < 0.0)
      throw std::invalid_argument("DetectorPlane: cutoff_freq must be >= 0");
  }
}

double sample_cos_theta_sin3(double u) {
  // CDF in mu = cos(theta): F(mu) = (mu^3 - 3 mu + 2) / 4; with s = 1 - mu
  // this is 3 s^2 - s^3 = 4 u, monotone on s in [0, 2].
  const double target = 4.0 * u;
  double lo = 0.0;
  double hi = 2.0;
  double s = std::sqrt(target / 3.0);  // small-u behaviour
  if (s >= hi) s = 1.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double h = (3.0 - s) * s * s - target;
    if (h > 0.0) {
      hi = s;
    } else {
      lo = s;
    }
    const double dh = 3.0 * s * (2.0 - s);
    double next = dh > 0.0 ? s - h / dh : 0.5 * (lo + hi);
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-13 && std::abs(h) < 1e-12) {
      s = next;
      break;
    }
    s = next;
  }
  return 1.0 - s;
}

Vec3 sample_direction_sin3(const Vec3& axis, RngStream& rng) {
  const double mu = sample_cos_theta_sin3(rng.uniform());
  const double phi = 2.0 * kPi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  Vec3 e1, e2;
  axis_frame(axis, e1, e2);
  return mu * normalized(axis) + s * (std::cos(phi) * e1 + std::sin(phi) * e2);
}

std::optional<DetectionEvent> sample_ideal_single(const EmitterParams& p,
                                                  const DetectorPlane& plane, RngStream& rng,
                                                  const std::string& photon_id) {
  validate(plane);
  if (plane.T <= p.source.t) {
    throw std::invalid_argument("sample_ideal_single: plane time must exceed source time");
  }
  const double horizon = plane.T - p.source.t;
  const double u_emit = rng.uniform();
  if (u_emit < std::exp(-p.gamma * horizon)) {
    return std::nullopt;  // photon not yet emitted at T
  }
  const double tau = rng.exponential_truncated(p.gamma, horizon);
  const double radius = horizon - tau;  // c = 1
  const Vec3 dir = sample_direction_sin3(p.dipole_axis, rng);
  return make_click(p.source.r, radius, dir, plane.T, photon_id);
}

SuperposedSample sample_superposed(const EmitterParams& p, std::complex<double> alpha,
                                   std::complex<double> beta, double d,
                                   const DetectorPlane& plane, RngStream& rng) {
  const double w_minus = amplitude_weight(alpha, beta);
  const bool minus = rng.uniform() < w_minus;
  EmitterParams displaced = p;
  displaced.source.r = Vec3{0.0, 0.0, minus ? -0.5 * d : 0.5 * d};
  SuperposedSample out;
  out.branch = minus ? "minus" : "plus";
  out.detection = sample_ideal_single(displaced, plane, rng, "0");
  return out;
}

CascadeSample sample_cascade(const CascadeParams& p, const DetectorPlane& plane, RngStream& rng) {
  validate(plane);
  const double horizon = plane.T - p.source.t;
  if (horizon <= 0.0) {
    throw std::invalid_argument("sample_cascade: plane time must exceed source time");
  }
  CascadeSample out;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  for (;;) {
    tau1 = rng.exponential(p.gamma1);
    tau2 = rng.exponential(p.gamma2);
    r1 = horizon - tau1;
    r2 = r1 - tau2;
    if (r2 > 0.0) break;
    ++out.resamples;  // pair not both on the plane
  }
  const Vec3 dir1 = sample_direction_sin3(p.dipole_axis, rng);
  const Vec3 dir2 = sample_direction_sin3(p.dipole_axis, rng);
  out.first = make_click(p.source.r, r1, dir1, plane.T, "0");
  out.second = make_click(p.source.r, r2, dir2, plane.T, "1");
  return out;
}

std::optional<DetectionEvent> sample_absorber(const EmitterParams& p, std::complex<double> alpha,
                                              std::complex<double> beta,
                                              const DetectorPlane& plane, RngStream& rng) {
  validate(plane);
  const double w_absorbed = amplitude_weight(alpha, beta);
  if (rng.uniform() < w_absorbed) {
    return std::nullopt;  // photon absorbed by the object, never reaches T
  }
  const double horizon = plane.T - p.source.t;
  const double tau = rng.exponential_truncated(p.gamma, horizon);
  const Vec3 dir = sample_direction_sin3(p.dipole_axis, rng);
  return make_click(p.source.r, horizon - tau, dir, plane.T, "0");
}

std::optional<Vec3> sample_momentum(const EmitterParams& p, std::complex<double> alpha,
                                    std::complex<double> beta, RngStream& rng) {
  const double w_null = amplitude_weight(alpha, beta);
  if (rng.uniform() < w_null) {
    return std::nullopt;
  }
  // Lorentzian of HWHM gamma/2 truncated to positive frequencies, by
  // inverse CDF of the conditional law.
  const double hw = 0.5 * p.gamma;
  const double f0 = 0.5 - std::atan(p.omega / hw) / kPi;  // CDF mass below 0
  const double u = f0 + rng.uniform() * (1.0 - f0);
  const double omega_p = p.omega + hw * std::tan(kPi * (u - 0.5));
  const Vec3 dir = sample_direction_sin3(p.dipole_axis, rng);
  return omega_p * dir;  // |p| = omega_p / c with c = hbar = 1
}

std::optional<CellIndex> coarsen(const DetectionEvent& d, const DetectorPlane& plane,
                                 double photon_freq) {
  if (plane.mode != PlaneMode::Grid) {
    throw std::invalid_argument("coarsen: detector plane is not in grid mode");
  }
  validate(plane);
  if (photon_freq < plane.cutoff_freq) return std::nullopt;
  const double L = plane.cell_size;
  return CellIndex{static_cast<std::int64_t>(std::floor(d.position.x / L)),
                   static_cast<std::int64_t>(std::floor(d.position.y / L)),
                   static_cast<std::int64_t>(std::floor(d.position.z / L))};
}

Vec3 cell_center(const CellIndex& cell, double cell_size) {
  return {(static_cast<double>(cell.i) + 0.5) * cell_size,
          (static_cast<double>(cell.j) + 0.5) * cell_size,
          (static_cast<double>(cell.k) + 0.5) * cell_size};
}

}  // namespace beablesim
