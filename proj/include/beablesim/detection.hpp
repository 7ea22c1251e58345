#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beablesim/photon_wave.hpp"
#include "beablesim/rng.hpp"
#include "beablesim/spacetime.hpp"

namespace beablesim {

enum class PlaneMode { Ideal, Grid };

/// The fictitious detector occupying the hyperplane t = T.  Grid mode
/// models an array of cubic cells of side cell_size that only register
/// photons above cutoff_freq (cycles per unit time).
struct DetectorPlane {
  double T = 1.0;
  PlaneMode mode = PlaneMode::Ideal;
  double cell_size = 0.0;
  double cutoff_freq = 0.0;
};

void validate(const DetectorPlane& plane);

/// Outcome of one fictitious late-time measurement: zero or more clicks on
/// the plane, plus the labels of branches that produced no click.
struct DetectionRecord {
  std::vector<DetectionEvent> detections;
  std::vector<std::string> no_detection_branches;
};

/// Inverse CDF of the polar density proportional to sin^3(theta): returns
/// cos(theta) for a uniform draw u in [0, 1).  Solved by safeguarded Newton
/// to 1e-12.
double sample_cos_theta_sin3(double u);

/// Direction with polar density sin^3 about the axis and uniform azimuth.
Vec3 sample_direction_sin3(const Vec3& axis, RngStream& rng);

/// Ideal single-photon detection: with probability e^{-gamma T} the photon
/// has not yet been emitted and there is no detection; otherwise the delay
/// tau is drawn from Exp(gamma) truncated to [0, T] and the click lands at
/// radius c (T - tau) from the source.
std::optional<DetectionEvent> sample_ideal_single(const EmitterParams& p,
                                                  const DetectorPlane& plane, RngStream& rng,
                                                  const std::string& photon_id = "0");

struct SuperposedSample {
  std::string branch;  // "minus" or "plus"
  std::optional<DetectionEvent> detection;
};

/// Two-site superposition: branch "minus" with probability |alpha|^2, then
/// an ideal detection displaced to the branch site (0, 0, -+ d/2).
SuperposedSample sample_superposed(const EmitterParams& p, std::complex<double> alpha,
                                   std::complex<double> beta, double d,
                                   const DetectorPlane& plane, RngStream& rng);

struct CascadeSample {
  DetectionEvent first;   // larger radius, emitted first
  DetectionEvent second;  // smaller radius
  int resamples = 0;      // pairs rejected because both were not on the plane
};

/// Cascade detection: tau1 ~ Exp(gamma1), tau2 ~ Exp(gamma2) independent,
/// radii r1 = c (T - tau1) and r2 = r1 - c tau2, independent angular draws.
CascadeSample sample_cascade(const CascadeParams& p, const DetectorPlane& plane, RngStream& rng);

/// Absorber scenario: no detection with probability |alpha|^2; otherwise a
/// detection conditioned on emission (delay from Exp(gamma) truncated at T).
std::optional<DetectionEvent> sample_absorber(const EmitterParams& p, std::complex<double> alpha,
                                              std::complex<double> beta,
                                              const DetectorPlane& plane, RngStream& rng);

/// Momentum-mode measurement: no photon with probability |alpha|^2;
/// otherwise a momentum drawn from momentum_density.
std::optional<Vec3> sample_momentum(const EmitterParams& p, std::complex<double> alpha,
                                    std::complex<double> beta, RngStream& rng);

struct CellIndex {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  bool operator==(const CellIndex&) const = default;
};

/// Coarse-grid readout: undetected if the photon frequency is below the
/// plane cutoff, otherwise the axis-aligned cell containing the click.
std::optional<CellIndex> coarsen(const DetectionEvent& d, const DetectorPlane& plane,
                                 double photon_freq);

/// Centre of a grid cell, the coarse detection position.
Vec3 cell_center(const CellIndex& cell, double cell_size);

}  // namespace beablesim
