#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "beablesim/quadrature.hpp"

using namespace beablesim;

TEST_CASE("integrate handles polynomials exactly") {
  auto f = [](double x) { return 3.0 * x * x; };
  const auto res = integrate(f, 0.0, 2.0);
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("integrate matches a known exponential integral") {
  auto f = [](double x) { return std::exp(-x); };
  const auto res = integrate_or_throw(f, 0.0, 30.0, 1e-12, 1e-12);
  CHECK(res.value == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-12));
}

TEST_CASE("integrate resolves oscillatory integrands") {
  // int_0^pi sin(40 x) dx = (1 - cos(40 pi)) / 40 = 0.
  auto f = [](double x) { return std::sin(40.0 * x); };
  const auto res = integrate(f, 0.0, std::numbers::pi, 1e-12, 1e-12);
  CHECK(res.converged);
  CHECK(std::abs(res.value) < 1e-10);
}

TEST_CASE("integrate supports complex integrands") {
  // int_0^1 e^{i k x} dx = (e^{ik} - 1) / (i k).
  const double k = 17.0;
  auto f = [k](double x) { return std::complex<double>{std::cos(k * x), std::sin(k * x)}; };
  const auto res = integrate(f, 0.0, 1.0, 1e-13, 1e-12);
  const std::complex<double> expected =
      (std::complex<double>{std::cos(k), std::sin(k)} - 1.0) / std::complex<double>{0.0, k};
  CHECK(std::abs(res.value - expected) < 1e-12);
}

TEST_CASE("integrate_or_throw reports non-convergence with the achieved error") {
  // An integrable singularity cannot be resolved to 1e-15 with depth 3.
  auto f = [](double x) { return 1.0 / std::sqrt(x + 1e-14); };
  try {
    (void)integrate_or_throw(f, 0.0, 1.0, 1e-15, 1e-15, 3);
    CHECK(false);
  } catch (const QuadratureError& e) {
    CHECK(e.achieved_error() > 0.0);
  }
}
