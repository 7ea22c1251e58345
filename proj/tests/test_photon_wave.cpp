#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "beablesim/photon_wave.hpp"
#include "beablesim/quadrature.hpp"
#include "beablesim/rng.hpp"

using namespace beablesim;

namespace {

constexpr double kPi = std::numbers::pi;

EmitterParams narrow_line(double gamma = 1.0, double omega = 1.0e6) {
  EmitterParams p;
  p.gamma = gamma;
  p.omega = omega;
  return p;
}

}  // namespace

TEST_CASE("normalization constant carries the 3/4 angular factor") {
  const EmitterParams p = narrow_line();
  // Analytic angular integral: int_0^pi sin^3 = 4/3, so K^2 = 3 gamma / (8 pi c)
  // and the ratio against gamma / (2 pi c) is exactly 3/4.
  CHECK(normalization_ratio_diagnostic(p) == doctest::Approx(0.75).epsilon(1e-9));
  const double k2 = normalization_constant(p) * normalization_constant(p);
  CHECK(k2 == doctest::Approx(3.0 * p.gamma / (8.0 * kPi)).epsilon(1e-9));
}

TEST_CASE("norm integral reproduces the exponential filling law") {
  const EmitterParams p = narrow_line(0.7);
  for (double gt : {0.5, 1.0, 3.0}) {
    const double t = gt / p.gamma;
    const double expected = 1.0 - std::exp(-gt);
    CHECK(norm_integral(p, t) == doctest::Approx(expected).epsilon(1e-7));
  }
  // Late-time limit tends to 1.
  CHECK(norm_integral(p, 200.0 / p.gamma) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("norm integral is non-decreasing in t") {
  const EmitterParams p = narrow_line(1.3);
  double prev = 0.0;
  for (double t = 0.25; t < 6.0; t += 0.25) {
    const double n = norm_integral(p, t);
    CHECK(n >= prev - 1e-12);
    prev = n;
  }
}

TEST_CASE("gamma_wf vanishes outside the light cone and on the dipole axis") {
  const EmitterParams p = narrow_line();
  const double k = normalization_constant(p);
  // Ahead of the light front.
  CHECK(gamma_wf(p, {0.0, 2.0, 0.0}, 1.0, k).value == std::complex<double>{});
  CHECK(gamma_wf(p, {0.0, 2.0, 0.0}, -1.0, k).value == std::complex<double>{});
  // On the dipole axis sin(theta) = 0.
  CHECK(std::abs(gamma_wf(p, {0.0, 0.0, 1.0}, 5.0, k).value) == 0.0);
  const Vec3 at_origin{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(gamma_wf(p, at_origin, 1.0, k), std::invalid_argument);
}

TEST_CASE("gamma_wf causal support at random points") {
  const EmitterParams p = narrow_line();
  const double k = normalization_constant(p);
  RngStream rng(1234, 0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 r{4.0 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5),
                 4.0 * (rng.uniform() - 0.5)};
    if (norm(r) < 1e-3) continue;
    const double t = 4.0 * (rng.uniform() - 0.5);
    const bool inside = t - norm(r) >= 0.0;
    const double mag = std::abs(gamma_wf(p, r, t, k).value);
    if (!inside) {
      CHECK(mag == 0.0);
    }
  }
}

TEST_CASE("squared amplitude at one decay time on the equator") {
  const EmitterParams p = narrow_line(2.0);
  const double k = normalization_constant(p);
  const double r = 3.0;
  const double t = r + 1.0 / p.gamma;  // delay tau = 1/gamma, c = 1
  const double expected = k * k / (r * r) * std::exp(-1.0);
  const std::complex<double> amp = gamma_wf(p, {r, 0.0, 0.0}, t, k).value;
  CHECK(std::norm(amp) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(gamma_density(p, {r, 0.0, 0.0}, t, k) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("radial delay density") {
  const EmitterParams p = narrow_line(1.7);
  CHECK(radial_delay_density(p, 0.0) == doctest::Approx(p.gamma));
  CHECK(radial_delay_density(p, -0.3) == 0.0);
  const auto res = integrate_or_throw([&p](double tau) { return radial_delay_density(p, tau); },
                                      0.0, 50.0 / p.gamma, 1e-12, 1e-10);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("overlap closed form special values") {
  CHECK(overlap_closed_form(0.0, 1.0) == 1.0);
  // x = pi at d = lambda / 2: 3 (0 + pi) / pi^3 = 3 / pi^2.
  CHECK(overlap_closed_form(0.5, 1.0) == doctest::Approx(3.0 / (kPi * kPi)).epsilon(1e-13));
  // Far separation: bounded by 3 (1 + x) / x^3 < 1e-3 at d = 20 lambda.
  CHECK(std::abs(overlap_closed_form(20.0, 1.0)) < 1e-3);
}

TEST_CASE("overlap closed form series joins the exact branch smoothly") {
  const double lambda = 1.0;
  // Points just below and above the series switch-over x = 1e-4.
  const double d_switch = 1e-4 * lambda / (2.0 * kPi);
  const double below = overlap_closed_form(d_switch * 0.99, lambda);
  const double above = overlap_closed_form(d_switch * 1.01, lambda);
  CHECK(below == doctest::Approx(1.0).epsilon(1e-9));
  // Just above the switch the exact branch still cancels to ~1e-8 relative;
  // the series side is exact to machine precision there.
  CHECK(std::abs(below - above) < 1e-7);
}

TEST_CASE("overlap closed form is within its envelope and peaks only at zero") {
  for (double d = 0.05; d < 8.0; d += 0.05) {
    const double v = overlap_closed_form(d, 1.0);
    CHECK(v <= 1.0);
    const double x = 2.0 * kPi * d;
    CHECK(std::abs(v) <= 3.0 * (1.0 + x) / (x * x * x) + 1e-12);
    if (d > 0.01) CHECK(v < 1.0);
  }
}

TEST_CASE("numeric overlap matches the closed form in the narrow-line regime") {
  const EmitterParams p = narrow_line(1.0, 1.0e6);
  const double lambda = p.wavelength();
  const double t = 20.0;  // norms ~ 1 - e^{-20}
  for (double ratio : {0.25, 1.0, 5.0}) {
    const double d = ratio * lambda;
    const double closed = overlap_closed_form(d, lambda);
    const double numeric = overlap_numeric(p, d, t);
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-3));
  }
}

TEST_CASE("numeric overlap at zero displacement reduces to the norm") {
  const EmitterParams p = narrow_line();
  const double t = 20.0;
  CHECK(overlap_numeric(p, 0.0, t) == doctest::Approx(1.0 - std::exp(-p.gamma * t)).epsilon(1e-7));
}

TEST_CASE("numeric overlap is essentially real") {
  const EmitterParams p = narrow_line(1.0, 1.0e7);
  const double lambda = p.wavelength();
  const auto v = overlap_numeric_complex(p, lambda, 20.0);
  CHECK(std::abs(v.imag()) < 1e-6 * std::abs(v));
}

TEST_CASE("numeric overlap preconditions") {
  EmitterParams wide;
  wide.gamma = 1.0;
  wide.omega = 10.0;  // gamma/omega = 0.1, not narrow-line
  CHECK_THROWS_AS(overlap_numeric(wide, 0.1, 20.0), std::invalid_argument);
  const EmitterParams p = narrow_line();
  CHECK_THROWS_AS(overlap_numeric(p, 0.1, 1.0), std::invalid_argument);  // norm below 0.99
}

TEST_CASE("two-photon amplitude symmetry and support") {
  CascadeParams p;
  p.gamma1 = 1.0;
  p.gamma2 = 2.0;
  p.omega1 = 1.0e5;
  p.omega2 = 2.0e5;
  const double k = two_photon_normalization(p);

  const Vec3 r1{3.0, 0.5, 0.0};
  const Vec3 r2{0.0, 1.5, 0.5};
  const double T = 12.0;
  const auto a = two_photon_wf(p, r1, T, r2, T, k).value;
  const auto b = two_photon_wf(p, r2, T, r1, T, k).value;
  CHECK(a == b);

  // Both retarded times negative: zero.
  CHECK(two_photon_wf(p, r1, 1.0, r2, 0.5, k).value == std::complex<double>{});
  const Vec3 at_origin{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(two_photon_wf(p, at_origin, 1.0, r2, 1.0, k), std::invalid_argument);
}

TEST_CASE("two-photon equal-time density has the ordered product form") {
  CascadeParams p;
  p.gamma1 = 0.8;
  p.gamma2 = 1.7;
  p.omega1 = 1.0e5;
  p.omega2 = 2.0e5;
  const double k = two_photon_normalization(p);
  const double T = 15.0;
  // Equator, r2 < r1: only one ordering term survives.
  const double r1 = 9.0;
  const double r2 = 5.0;
  const auto amp = two_photon_wf(p, {r1, 0.0, 0.0}, T, {r2, 0.0, 0.0}, T, k).value;
  const double expected = k * k / (r1 * r1 * r2 * r2) * std::exp(-p.gamma1 * (T - r1)) *
                          std::exp(-p.gamma2 * (r1 - r2));
  CHECK(std::norm(amp) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("two-photon plane norm tends to 1 and matches the analytic constant") {
  CascadeParams p;
  p.gamma1 = 1.0;
  p.gamma2 = 2.0;
  CHECK(two_photon_plane_norm(p, 60.0) == doctest::Approx(1.0).epsilon(1e-3));
  // Independent oracle: carrying out the angular and radial integrals by hand
  // gives K'^2 = 9 gamma1 gamma2 / (128 pi^2 c^2).
  const double expected = std::sqrt(9.0 * p.gamma1 * p.gamma2 / (128.0 * kPi * kPi));
  CHECK(two_photon_normalization(p) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("momentum density is normalised and peaks on the line shell") {
  const EmitterParams p = narrow_line(1.0, 5.0e3);
  // Frequency marginal integrates to 1.
  const auto freq = integrate_or_throw(
      [&p](double w) { return momentum_frequency_density(p, w); }, 1e-12,
      p.omega + 4000.0 * p.gamma, 1e-10, 1e-8);
  CHECK(freq.value == doctest::Approx(1.0).epsilon(2e-3));  // Lorentzian tails are heavy
  // Full 3D normalisation via spherical quadrature.
  auto radial = [&p](double w) {
    auto ang = integrate(
        [&p, w](double theta) {
          const Vec3 dir{std::sin(theta), 0.0, std::cos(theta)};
          return momentum_density(p, w * dir) * w * w * std::sin(theta) * 2.0 * kPi;
        },
        0.0, kPi, 1e-12, 1e-9);
    return ang.value;
  };
  const auto full = integrate_or_throw(radial, 1e-12, p.omega + 4000.0 * p.gamma, 1e-8, 1e-6);
  CHECK(full.value == doctest::Approx(1.0).epsilon(2e-3));

  // Peak on the shell |p| = omega, theta = pi/2.
  const double peak = momentum_frequency_density(p, p.omega);
  CHECK(momentum_frequency_density(p, p.omega + p.gamma) < peak);
  CHECK(momentum_frequency_density(p, p.omega - p.gamma) < peak);

  // FWHM in frequency equals gamma.
  const double half = 0.5 * peak;
  const double at_half_up = momentum_frequency_density(p, p.omega + 0.5 * p.gamma);
  CHECK(at_half_up == doctest::Approx(half).epsilon(1e-6));
}

TEST_CASE("momentum density is azimuthally symmetric about the dipole axis") {
  const EmitterParams p = narrow_line();
  const double w = p.omega;
  const double theta = 1.1;
  double first = -1.0;
  for (double phi : {0.0, 1.0, 2.5, 4.0}) {
    const Vec3 dir{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                   std::cos(theta)};
    const double v = momentum_density(p, w * dir);
    if (first < 0.0) {
      first = v;
    } else {
      CHECK(v == doctest::Approx(first).epsilon(1e-12));
    }
  }
}
