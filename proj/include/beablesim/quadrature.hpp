#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace beablesim {

/// Thrown when an adaptive integration cannot reach the requested tolerance;
/// carries the achieved error estimate.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : std::runtime_error(what + " (achieved error estimate " +
                           std::to_string(achieved_error) + ")"),
        achieved_error_(achieved_error) {}

  double achieved_error() const { return achieved_error_; }

 private:
  double achieved_error_;
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (QUADPACK dqk15).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kGk15KronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGk15GaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
auto gk15(F&& f, double a, double b, double& err) {
  using T = decltype(f(a));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  T kronrod{};
  T gauss{};
  for (int i = 0; i < 8; ++i) {
    const double dx = half * kGk15Nodes[i];
    T fs = f(mid - dx);
    if (i < 7) fs = fs + f(mid + dx);
    kronrod = kronrod + kGk15KronrodWeights[i] * fs;
    if (i % 2 == 1) gauss = gauss + kGk15GaussWeights[i / 2] * fs;
  }
  kronrod = half * kronrod;
  gauss = half * gauss;
  err = std::abs(kronrod - gauss);
  return kronrod;
}

template <class F, class T>
void adapt(F&& f, double a, double b, double tol, int depth, QuadResult<T>& acc) {
  double err = 0.0;
  const T val = gk15(f, a, b, err);
  acc.evaluations += 15;
  if (err <= tol || depth <= 0) {
    acc.value = acc.value + val;
    acc.error += err;
    if (err > tol) acc.converged = false;
    return;
  }
  const double mid = 0.5 * (a + b);
  adapt(f, a, mid, 0.5 * tol, depth - 1, acc);
  adapt(f, mid, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].  The subdivision
/// stops once the local error estimate satisfies the (halved per split)
/// tolerance max(abs_tol, rel_tol * |I|), estimated from a first whole-range
/// pass.  Works for real- and complex-valued integrands.
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-10, double rel_tol = 1e-8,
               int max_depth = 48) {
  using T = decltype(f(a));
  QuadResult<T> acc;
  acc.converged = true;
  if (a == b) return acc;
  double err0 = 0.0;
  const T rough = detail::gk15(f, a, b, err0);
  const double tol = std::max(abs_tol, rel_tol * std::abs(rough));
  detail::adapt(f, a, b, tol, max_depth, acc);
  return acc;
}

/// Like integrate() but throws QuadratureError when the tolerance was not
/// reached.
template <class F>
auto integrate_or_throw(F&& f, double a, double b, double abs_tol = 1e-10,
                        double rel_tol = 1e-8, int max_depth = 48) {
  auto res = integrate(std::forward<F>(f), a, b, abs_tol, rel_tol, max_depth);
  if (!res.converged) {
    throw QuadratureError("adaptive quadrature did not converge", res.error);
  }
  return res;
}

}  // namespace beablesim
