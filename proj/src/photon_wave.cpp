#include "beablesim/photon_wave.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "beablesim/quadrature.hpp"

namespace beablesim {

namespace {

constexpr double kPi = std::numbers::pi;

double sin_theta(const Vec3& r, const Vec3& axis) {
  const double rn = norm(r);
  const double an = norm(axis);
  const double c = dot(r, axis) / (rn * an);
  const double clamped = std::clamp(c, -1.0, 1.0);
  return std::sqrt(1.0 - clamped * clamped);
}

// Radial part of the norm integral at time t: int_0^t e^{-gamma (t - r)} dr
// (c = 1), computed adaptively.
double radial_norm_integral(double gamma, double t) {
  if (t <= 0.0) return 0.0;
  auto f = [gamma, t](double r) { return std::exp(-gamma * (t - r)); };
  return integrate_or_throw(f, 0.0, t, 1e-12, 1e-10).value;
}

// int_0^pi sin^3(theta) dtheta = 4/3, kept as a quadrature so K really is
// fixed numerically.
double angular_norm_integral() {
  auto f = [](double theta) {
    const double s = std::sin(theta);
    return s * s * s;
  };
  return integrate_or_throw(f, 0.0, kPi, 1e-12, 1e-10).value;
}

// Late-time limit: beyond ~60 decay times the residual is below double
// precision.
double late_time(double gamma) { return 60.0 / gamma; }

}  // namespace

double EmitterParams::wavelength() const { return 2.0 * kPi / omega; }

double EmitterParams::line_frequency() const { return omega / (2.0 * kPi); }

double normalization_constant(const EmitterParams& p) {
  if (p.gamma <= 0.0) throw std::invalid_argument("normalization_constant: gamma must be > 0");
  const double t = late_time(p.gamma);
  const double integral = 2.0 * kPi * angular_norm_integral() * radial_norm_integral(p.gamma, t);
  return 1.0 / std::sqrt(integral);
}

double normalization_ratio_diagnostic(const EmitterParams& p) {
  const double k = normalization_constant(p);
  return k * k / (p.gamma / (2.0 * kPi));
}

WaveAmplitude gamma_wf(const EmitterParams& p, const Vec3& r, double t) {
  return gamma_wf(p, r, t, normalization_constant(p));
}

WaveAmplitude gamma_wf(const EmitterParams& p, const Vec3& r, double t, double k_norm) {
  const double rn = norm(r);
  if (rn <= 0.0) throw std::invalid_argument("gamma_wf: r = 0 is singular");
  const double tau = t - rn;  // retarded time, c = 1
  if (tau < 0.0) return {};
  const double envelope = k_norm * sin_theta(r, p.dipole_axis) / rn * std::exp(-0.5 * p.gamma * tau);
  const std::complex<double> phase = std::polar(1.0, -p.omega * tau);
  return {envelope * phase};
}

double gamma_density(const EmitterParams& p, const Vec3& r, double t, double k_norm) {
  const double rn = norm(r);
  if (rn <= 0.0) throw std::invalid_argument("gamma_density: r = 0 is singular");
  const double tau = t - rn;
  if (tau < 0.0) return 0.0;
  const double s = sin_theta(r, p.dipole_axis);
  return k_norm * k_norm * s * s / (rn * rn) * std::exp(-p.gamma * tau);
}

double norm_integral(const EmitterParams& p, double t) {
  const double k = normalization_constant(p);
  return k * k * 2.0 * kPi * angular_norm_integral() * radial_norm_integral(p.gamma, t);
}

double radial_delay_density(const EmitterParams& p, double tau) {
  return tau >= 0.0 ? p.gamma * std::exp(-p.gamma * tau) : 0.0;
}

double overlap_closed_form(double d, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("overlap_closed_form: lambda must be > 0");
  if (d < 0.0) throw std::invalid_argument("overlap_closed_form: d must be >= 0");
  const double x = 2.0 * kPi * d / lambda;
  if (x < 1e-4) {
    // Series around x = 0 avoids the 0/0 cancellation.
    const double x2 = x * x;
    return 1.0 - x2 / 10.0 + x2 * x2 / 280.0;
  }
  return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

namespace {

// The displaced-mode inner product in prolate spheroidal coordinates with
// foci at the two sites (separation d along the dipole axis):
//
//   xi  = (r+ + r-) / d in [1, inf),  eta = (r+ - r-) / d in [-1, 1],
//
// where r+- are the distances from the two sites.  The azimuth integral is
// analytic (2 pi), the phase depends only on eta, and the xi integral is a
// smooth exponential handled in the delay variable u = t - d xi / 2.
std::complex<double> overlap_integral(const EmitterParams& p, double d, double t) {
  const double k = normalization_constant(p);
  const double kappa = p.omega * d;  // phase = kappa * eta (c = 1)
  const double gamma = p.gamma;

  auto inner = [&](double eta) {
    const double abs_eta = std::abs(eta);
    // Both step functions require xi <= 2t/d - |eta|; in the delay variable
    // u = t - d xi / 2 the support is [d |eta| / 2, t - d / 2].
    const double u_lo = 0.5 * d * abs_eta;
    const double u_hi = t - 0.5 * d;
    if (u_hi <= u_lo) return 0.0;
    // The exponential tail beyond ~50 decay times contributes nothing.
    const double u_cut = std::min(u_hi, u_lo + 50.0 / gamma);
    auto f = [&](double u) {
      const double xi = 2.0 * (t - u) / d;
      const double g = (xi * xi - 1.0) / (xi * xi - eta * eta);
      return g * std::exp(-gamma * u);
    };
    return (2.0 / d) * integrate(f, u_lo, u_cut, 1e-13, 1e-10).value;
  };

  auto outer = [&](double eta) {
    const double weight = (1.0 - eta * eta) * inner(eta);
    return weight * std::complex<double>{std::cos(kappa * eta), std::sin(kappa * eta)};
  };

  const auto res = integrate_or_throw(outer, -1.0, 1.0, 1e-11, 1e-9);
  return k * k * 2.0 * kPi * (0.5 * d) * res.value;
}

}  // namespace

std::complex<double> overlap_numeric_complex(const EmitterParams& p, double d, double t) {
  if (!p.paper_regime()) {
    throw std::invalid_argument("overlap_numeric: requires gamma << omega");
  }
  if (-std::expm1(-p.gamma * t) < 0.99) {
    throw std::invalid_argument("overlap_numeric: t too small, norms below 0.99");
  }
  if (d == 0.0) {
    return {norm_integral(p, t), 0.0};
  }
  return overlap_integral(p, d, t);
}

double overlap_numeric(const EmitterParams& p, double d, double t) {
  return overlap_numeric_complex(p, d, t).real();
}

namespace {

double cascade_radial_integral(const CascadeParams& p, double T) {
  // int_0^T dr1 e^{-g1 (T - r1)} int_0^r1 dr2 e^{-g2 (r1 - r2)}  (c = 1).
  auto inner = [&p](double r1) {
    return -std::expm1(-p.gamma2 * r1) / p.gamma2;
  };
  auto f = [&](double r1) { return std::exp(-p.gamma1 * (T - r1)) * inner(r1); };
  return integrate_or_throw(f, 0.0, T, 1e-12, 1e-10).value;
}

}  // namespace

double two_photon_normalization(const CascadeParams& p) {
  const double T = 60.0 / p.gamma1 + 60.0 / p.gamma2;
  const double ang = 2.0 * kPi * angular_norm_integral();
  // Factor 2 from the symmetrisation: integrating over both orderings of
  // (r1, r2) double-counts the r2 < r1 region.
  const double integral = 2.0 * ang * ang * cascade_radial_integral(p, T);
  return 1.0 / std::sqrt(integral);
}

WaveAmplitude two_photon_wf(const CascadeParams& p, const Vec3& r1, double t1, const Vec3& r2,
                            double t2) {
  return two_photon_wf(p, r1, t1, r2, t2, two_photon_normalization(p));
}

WaveAmplitude two_photon_wf(const CascadeParams& p, const Vec3& r1, double t1, const Vec3& r2,
                            double t2, double k_norm) {
  const double rn1 = norm(r1);
  const double rn2 = norm(r2);
  if (rn1 <= 0.0 || rn2 <= 0.0) throw std::invalid_argument("two_photon_wf: r = 0 is singular");

  const double s1 = sin_theta(r1, p.dipole_axis);
  const double s2 = sin_theta(r2, p.dipole_axis);
  const double u1 = t1 - rn1;
  const double u2 = t2 - rn2;

  auto ordered_term = [&](double ua, double sa, double ra, double ub, double sb,
                          double rb) -> std::complex<double> {
    // First factor: photon emitted in the e2 -> e1 step at retarded time ua;
    // second factor is conditional on it, supported on ub >= ua.
    if (ua < 0.0 || ub < ua) return {};
    const double envelope = (sa / ra) * (sb / rb) *
                            std::exp(-0.5 * p.gamma1 * ua - 0.5 * p.gamma2 * (ub - ua));
    return envelope * std::polar(1.0, -p.omega1 * ua - p.omega2 * (ub - ua));
  };

  const std::complex<double> sum =
      ordered_term(u1, s1, rn1, u2, s2, rn2) + ordered_term(u2, s2, rn2, u1, s1, rn1);
  return {k_norm * sum};
}

double two_photon_plane_norm(const CascadeParams& p, double T) {
  const double k = two_photon_normalization(p);
  const double ang = 2.0 * kPi * angular_norm_integral();
  return 2.0 * k * k * ang * ang * cascade_radial_integral(p, T);
}

double momentum_frequency_density(const EmitterParams& p, double omega_p) {
  if (omega_p <= 0.0) return 0.0;
  const double hw = 0.5 * p.gamma;
  const double lorentz = (hw / kPi) / ((omega_p - p.omega) * (omega_p - p.omega) + hw * hw);
  // Renormalise for the truncation to positive frequencies.
  const double mass_above_zero = 0.5 + std::atan(p.omega / hw) / kPi;
  return lorentz / mass_above_zero;
}

double momentum_angular_density(const EmitterParams& p, const Vec3& direction) {
  const double s = sin_theta(direction, p.dipole_axis);
  return 3.0 / (8.0 * kPi) * s * s;
}

double momentum_density(const EmitterParams& p, const Vec3& momentum) {
  const double mag = norm(momentum);
  if (mag <= 0.0) return 0.0;
  // d^3p = omega_p^2 domega_p dOmega with |p| = omega_p (c = hbar = 1).
  return momentum_frequency_density(p, mag) * momentum_angular_density(p, momentum) / (mag * mag);
}

}  // namespace beablesim
