#pragma once

#include <complex>

#include "beablesim/spacetime.hpp"

namespace beablesim {

// This module works in natural units c = 1 (and hbar = 1 for momenta):
// lengths are light-seconds, momenta equal angular frequencies.  The
// configuration layer converts to and from SI on input/output.

/// Parameters of a two-level emitter decaying at rate gamma with transition
/// angular frequency omega.  The dipole axis defines the polar angle of the
/// sin(theta) emission envelope.
struct EmitterParams {
  double gamma = 1.0;
  double omega = 1.0e4;
  Event source{};
  Vec3 dipole_axis{0.0, 0.0, 1.0};

  /// True when gamma << omega, the regime the closed-form overlap assumes.
  bool paper_regime() const { return gamma / omega < 1e-2; }

  /// Wavelength 2*pi*c/omega of the emission line (c = 1).
  double wavelength() const;

  /// Line frequency omega / 2 pi in cycles per unit time, the quantity the
  /// detector grid cutoff compares against.
  double line_frequency() const;
};

/// Parameters of a two-step cascade: e2 -> e1 at rate gamma1 (frequency
/// omega1), then e1 -> g at rate gamma2 (frequency omega2).
struct CascadeParams {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double omega1 = 1.0e4;
  double omega2 = 1.0e4;
  Event source{};
  Vec3 dipole_axis{0.0, 0.0, 1.0};
};

/// Complex photon amplitude, dimension length^{-3/2}.
struct WaveAmplitude {
  std::complex<double> value{};
};

/// Normalisation constant K fixed by adaptive quadrature so the late-time
/// norm of the single-photon wave function is 1.  Depends only on gamma
/// (c = 1).  Throws QuadratureError on non-convergence.
double normalization_constant(const EmitterParams& p);

/// Diagnostic ratio K^2 / (gamma / 2 pi c).  The angular integral of
/// sin^2(theta) makes this 3/4 rather than 1.
double normalization_ratio_diagnostic(const EmitterParams& p);

/// Single-photon amplitude at (r, t) relative to the source: a sin(theta)/r
/// envelope behind the light cone with exponential-decay modulation.
/// Identically zero outside the future light cone of the source.  Rejects
/// r = 0.
WaveAmplitude gamma_wf(const EmitterParams& p, const Vec3& r, double t);
WaveAmplitude gamma_wf(const EmitterParams& p, const Vec3& r, double t, double k_norm);

/// |gamma_wf|^2 without evaluating the oscillatory phase.
double gamma_density(const EmitterParams& p, const Vec3& r, double t, double k_norm);

/// Norm integral of |gamma_wf|^2 over all space at time t, by nested
/// adaptive quadrature over (r, theta) with the azimuth integrated
/// analytically.  Equals 1 - e^{-gamma t}.
double norm_integral(const EmitterParams& p, double t);

/// Probability density of the detection delay tau = T - r/c: gamma *
/// e^{-gamma tau} for tau >= 0, else 0.
double radial_delay_density(const EmitterParams& p, double tau);

/// Closed-form displaced-mode overlap 3 (sin x - x cos x) / x^3 with
/// x = 2 pi d / lambda; continuous limit 1 at d = 0, even in d.
double overlap_closed_form(double d, double lambda);

/// Overlap integral of the two displaced wave functions at time t, by
/// quadrature in prolate spheroidal coordinates (foci at the two sites).
/// Requires the gamma << omega regime and norms above 0.99.
double overlap_numeric(const EmitterParams& p, double d, double t);
std::complex<double> overlap_numeric_complex(const EmitterParams& p, double d, double t);

/// Two-photon cascade normalisation K' fixed by quadrature so the late-time
/// equal-time plane density integrates to 1.
double two_photon_normalization(const CascadeParams& p);

/// Symmetrised two-photon cascade amplitude; arguments relative to the
/// source.  Rejects r1 = 0 or r2 = 0.
WaveAmplitude two_photon_wf(const CascadeParams& p, const Vec3& r1, double t1, const Vec3& r2,
                            double t2);
WaveAmplitude two_photon_wf(const CascadeParams& p, const Vec3& r1, double t1, const Vec3& r2,
                            double t2, double k_norm);

/// Integral of the equal-time two-photon density over both positions at
/// plane time T (tends to 1 for large T).
double two_photon_plane_norm(const CascadeParams& p, double T);

/// Momentum-space density over d^3p (c = hbar = 1): frequency marginal is a
/// Lorentzian of HWHM gamma/2 centred at omega and truncated to positive
/// frequencies, angular marginal is proportional to sin^2(theta) about the
/// dipole axis.  Normalised to 1.
double momentum_density(const EmitterParams& p, const Vec3& momentum);

/// Frequency marginal of momentum_density (the truncated Lorentzian).
double momentum_frequency_density(const EmitterParams& p, double omega_p);

/// Angular marginal of momentum_density over solid angle: (3/8pi) sin^2.
double momentum_angular_density(const EmitterParams& p, const Vec3& direction);

}  // namespace beablesim
