#include "beablesim/detail/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "beablesim/quadrature.hpp"

namespace beablesim::detail {

namespace {

constexpr double kPi = std::numbers::pi;

// Exponential latent law restricted to (lower, truncation].
struct CondLaw {
  double rate = 1.0;
  std::optional<double> trunc{};
  double lower = 0.0;

  double base_cdf(double x) const {
    if (x <= 0.0) return 0.0;
    double f = -std::expm1(-rate * x);
    if (trunc) f = std::min(f, -std::expm1(-rate * *trunc));
    return f;
  }

  double mass() const {
    const double hi = trunc ? -std::expm1(-rate * *trunc) : 1.0;
    return hi - base_cdf(lower);
  }

  double cdf(double x) const {
    const double m = mass();
    if (m <= 0.0) return 1.0;
    if (trunc && x >= *trunc) return 1.0;
    return std::clamp((base_cdf(x) - base_cdf(lower)) / m, 0.0, 1.0);
  }

  double density(double x) const {
    if (x < lower || x < 0.0) return 0.0;
    if (trunc && x > *trunc) return 0.0;
    const double m = mass();
    if (m <= 0.0) return 0.0;
    return rate * std::exp(-rate * x) / m;
  }
};

CondLaw law_for(const LatentSpec& spec, const LatentConditional& lc) {
  return CondLaw{spec.rate, spec.truncation, lc.hard_lower};
}

// Emission-time window (s_begin, s_end) for which a click from a source
// displaced by `delta` from the query point lies strictly inside the cone of
// radius `cone_radius` on the plane t = T.
struct Window {
  double s_begin = 0.0;
  double s_end = 0.0;
  bool empty = true;
};

Window inside_window(const Vec3& delta, double cone_radius, double T, const Vec3& n) {
  const double b = dot(n, delta);
  const double disc = b * b - (norm_squared(delta) - cone_radius * cone_radius);
  if (disc <= 0.0) return {};
  const double sq = std::sqrt(disc);
  const double rho_hi = std::min(-b + sq, T);
  const double rho_lo = std::max(-b - sq, 0.0);
  if (rho_hi <= rho_lo) return {};
  return {T - rho_hi, T - rho_lo, false};
}

// Expectation of g(n) over the sin^2-weighted direction density about `axis`.
template <class F>
double angular_expect(const Vec3& axis, const Vec3& delta, F&& g) {
  const Vec3 a = normalized(axis);
  const Vec3 perp = delta - dot(delta, a) * a;
  if (norm(perp) < 1e-14 * (norm(delta) + 1.0)) {
    // Azimuthally symmetric: 1D in mu.
    auto f = [&](double mu) {
      const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
      const Vec3 e1 = std::abs(a.z) < 0.9 ? normalized(cross(Vec3{0, 0, 1}, a))
                                          : normalized(cross(Vec3{1, 0, 0}, a));
      return (1.0 - mu * mu) * g(mu * a + s * e1);
    };
    return 0.75 * integrate(f, -1.0, 1.0, 1e-10, 1e-8).value;
  }
  const Vec3 e1 = normalized(perp);
  const Vec3 e2 = cross(a, e1);
  auto outer = [&](double mu) {
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    auto inner = [&](double phi) {
      return g(mu * a + s * (std::cos(phi) * e1 + std::sin(phi) * e2));
    };
    return (1.0 - mu * mu) * integrate(inner, 0.0, 2.0 * kPi, 1e-9, 1e-7).value;
  };
  return 3.0 / (8.0 * kPi) * integrate(outer, -1.0, 1.0, 1e-9, 1e-7).value;
}

// P(photon click not outside the cone) for a single-latent emission time
// s = offset + tau.  "Not outside" covers both a click inside the window and
// no click at all (emission beyond the horizon).
double not_outside_probability(const CondLaw& law, const Vec3& axis, const Vec3& delta,
                               double offset, double cone_radius, double T) {
  const double no_click = 1.0 - law.cdf(T - offset);
  auto g = [&](const Vec3& n) {
    const Window w = inside_window(delta, cone_radius, T, n);
    if (w.empty) return 0.0;
    return std::max(0.0, law.cdf(w.s_end - offset) - law.cdf(w.s_begin - offset));
  };
  return no_click + angular_expect(axis, delta, g);
}

// P(tau <= theta and click not outside) for a soft-constrained latent.
double joint_below(const CondLaw& law, const LatentConditional& lc, double theta, double T) {
  const double no_click =
      std::max(0.0, law.cdf(theta) - law.cdf(T - lc.soft_offset));
  auto g = [&](const Vec3& n) {
    const Window w = inside_window(lc.soft_delta, lc.soft_cone_radius, T, n);
    if (w.empty) return 0.0;
    const double hi = std::min(theta, w.s_end - lc.soft_offset);
    return std::max(0.0, law.cdf(hi) - law.cdf(w.s_begin - lc.soft_offset));
  };
  return no_click + angular_expect(lc.soft_axis, lc.soft_delta, g);
}

// Conditional CDF of one latent at theta.
double latent_cdf(const LatentSpec& spec, const LatentConditional& lc, double theta, double T) {
  if (lc.pinned) return lc.value <= theta ? 1.0 : 0.0;
  const CondLaw law = law_for(spec, lc);
  if (!lc.soft) return law.cdf(theta);
  const double z = not_outside_probability(law, lc.soft_axis, lc.soft_delta, lc.soft_offset,
                                           lc.soft_cone_radius, T);
  if (z <= 0.0) return 0.0;
  return std::clamp(joint_below(law, lc, theta, T) / z, 0.0, 1.0);
}

double direction_density(const EmitterParams& params, const Vec3& direction) {
  const double c = dot(normalized(direction), normalized(params.dipole_axis));
  return 3.0 / (8.0 * kPi) * (1.0 - c * c);
}

bool below_cutoff(const Scenario& scn, const EmissionSpec& e) {
  return scn.plane.mode == PlaneMode::Grid &&
         e.params.line_frequency() < scn.plane.cutoff_freq;
}

FamilyConditional condition_family(const Scenario& scn, const BranchFamily& family,
                                   const std::vector<DetectionEvent>& outside_clicks,
                                   const Event& x) {
  const double T = scn.plane.T;
  const double tol = kConeRelTol * T + 1e-12;
  const double cone_radius = T - x.t;

  FamilyConditional cond;
  cond.latents.assign(family.latents.size(), LatentConditional{});
  cond.click_densities.assign(outside_clicks.size(), 0.0);

  std::vector<bool> used(outside_clicks.size(), false);
  double like = 1.0;

  for (const auto& emission : family.emissions) {
    if (below_cutoff(scn, emission)) continue;  // invisible to the detector

    std::size_t click_idx = outside_clicks.size();
    for (std::size_t i = 0; i < outside_clicks.size(); ++i) {
      if (!used[i] && outside_clicks[i].photon_id == emission.photon_id) {
        click_idx = i;
        used[i] = true;
        break;
      }
    }

    double c0 = emission.emit_time.constant;
    std::vector<std::size_t> unpinned;
    for (std::size_t idx : emission.emit_time.latents) {
      if (cond.latents[idx].pinned) {
        c0 += cond.latents[idx].value;
      } else {
        unpinned.push_back(idx);
      }
    }

    if (click_idx < outside_clicks.size()) {
      const DetectionEvent& click = outside_clicks[click_idx];
      if (click.kind != DetectionKind::Position) {
        throw std::invalid_argument("light-cone conditioning requires position detections");
      }
      const double radius = norm(click.position - emission.params.source.r);
      const double s_pin = T - radius;
      if (radius <= tol) return cond;

      if (unpinned.empty()) {
        if (std::abs(c0 - s_pin) > tol) return cond;
        continue;
      }
      if (unpinned.size() > 1) {
        throw std::logic_error("condition_family: several unpinned latents pinned by one click");
      }
      const std::size_t idx = unpinned.front();
      double v = s_pin - c0;
      if (v < -tol) return cond;
      v = std::max(v, 0.0);
      const auto& spec = family.latents[idx];
      if (spec.truncation && v > *spec.truncation + tol) return cond;
      if (v < cond.latents[idx].hard_lower - tol) return cond;

      const CondLaw law = law_for(spec, cond.latents[idx]);
      const double f = law.density(std::min(v, spec.truncation.value_or(v)));
      if (f <= 0.0) return cond;
      const double density = f *
                             direction_density(emission.params,
                                               click.position - emission.params.source.r) /
                             (radius * radius);
      cond.latents[idx].pinned = true;
      cond.latents[idx].value = v;
      cond.click_densities[click_idx] = density;
      like *= density;
      continue;
    }

    // No outside click from this photon.
    const Vec3 delta = emission.params.source.r - x.r;
    const bool at_source = norm(delta) <= tol;

    if (unpinned.empty()) {
      // Emission time known: the click, if any, must not be outside.
      if (c0 > T) continue;
      auto g = [&](const Vec3& n) {
        const Window w = inside_window(delta, cone_radius, T, n);
        return (!w.empty && c0 > w.s_begin && c0 < w.s_end) ? 1.0 : 0.0;
      };
      const double factor = angular_expect(emission.params.dipole_axis, delta, g);
      like *= factor;
      if (like == 0.0) {
        cond.consistent = true;
        cond.likelihood = 0.0;
        return cond;
      }
      continue;
    }

    if (unpinned.size() == 1) {
      const std::size_t idx = unpinned.front();
      const auto& spec = family.latents[idx];
      auto& lc = cond.latents[idx];
      const CondLaw law = law_for(spec, lc);
      if (at_source) {
        // Sharp constraint: the click is inside iff emitted after x.t.
        const double factor = 1.0 - law.cdf(x.t - c0);
        like *= factor;
        lc.hard_lower = std::max(lc.hard_lower, x.t - c0);
      } else {
        if (lc.soft) {
          throw std::logic_error("condition_family: latent constrained by two no-click regions");
        }
        const double factor = not_outside_probability(law, emission.params.dipole_axis, delta, c0,
                                                      cone_radius, T);
        like *= factor;
        lc.soft = true;
        lc.soft_delta = delta;
        lc.soft_offset = c0;
        lc.soft_cone_radius = cone_radius;
        lc.soft_axis = emission.params.dipole_axis;
      }
      continue;
    }

    if (unpinned.size() == 2) {
      // Chain expression (cascade): integrate over the first latent's
      // conditional law, treating the latents as independently conditioned.
      const auto& spec_a = family.latents[unpinned[0]];
      const auto& lc_a = cond.latents[unpinned[0]];
      const auto& spec_b = family.latents[unpinned[1]];
      const auto& lc_b = cond.latents[unpinned[1]];
      const CondLaw law_a = law_for(spec_a, lc_a);
      const CondLaw law_b = law_for(spec_b, lc_b);
      const double hi = lc_a.hard_lower + 60.0 / spec_a.rate;
      auto f = [&](double v) {
        return law_a.density(v) * not_outside_probability(law_b, emission.params.dipole_axis,
                                                          delta, c0 + v, cone_radius, T);
      };
      const double factor = integrate(f, lc_a.hard_lower, hi, 1e-8, 1e-6).value;
      like *= std::clamp(factor, 0.0, 1.0);
      continue;
    }
    throw std::logic_error("condition_family: emission time with more than two unpinned latents");
  }

  // Outside clicks this family cannot produce.
  for (std::size_t i = 0; i < outside_clicks.size(); ++i) {
    if (!used[i]) return cond;
  }

  cond.consistent = true;
  cond.likelihood = like;
  return cond;
}

}  // namespace

std::vector<FamilyConditional> condition_all(const Scenario& scn,
                                             const std::vector<DetectionEvent>& outside_clicks,
                                             const Event& x) {
  std::vector<FamilyConditional> out;
  out.reserve(scn.families.size());
  for (const auto& f : scn.families) {
    out.push_back(condition_family(scn, f, outside_clicks, x));
  }

  if (scn.config.mode == ConditioningMode::Paper) {
    // Disjoint-support approximation: each click belongs to the family with
    // the highest density there; the others cannot explain it.
    for (std::size_t i = 0; i < outside_clicks.size(); ++i) {
      double max_density = 0.0;
      for (const auto& c : out) {
        if (c.consistent) max_density = std::max(max_density, c.click_densities[i]);
      }
      if (max_density <= 0.0) continue;
      for (auto& c : out) {
        if (c.consistent && c.click_densities[i] < max_density) {
          c.likelihood = 0.0;
        }
      }
    }
  }
  return out;
}

double occurrence_probability(const BranchFamily& family, const FamilyConditional& cond,
                              const TimeExpr& expr, double t, double plane_time) {
  double c0 = expr.constant;
  std::vector<std::size_t> unpinned;
  for (std::size_t idx : expr.latents) {
    if (cond.latents[idx].pinned) {
      c0 += cond.latents[idx].value;
    } else {
      unpinned.push_back(idx);
    }
  }
  // Boundary convention: a transition at exactly t has occurred (t >= t0).
  // The click that pins t0 is classified outside within the cone tolerance,
  // so the comparison here must carry the same slack.
  if (unpinned.empty()) return c0 <= t + kConeRelTol * plane_time ? 1.0 : 0.0;

  if (unpinned.size() == 1) {
    const std::size_t idx = unpinned.front();
    return latent_cdf(family.latents[idx], cond.latents[idx], t - c0, plane_time);
  }
  if (unpinned.size() == 2) {
    const auto& spec_a = family.latents[unpinned[0]];
    const auto& lc_a = cond.latents[unpinned[0]];
    const double theta = t - c0;
    if (theta <= lc_a.hard_lower + cond.latents[unpinned[1]].hard_lower) return 0.0;
    const CondLaw law_a = law_for(spec_a, lc_a);
    auto f = [&](double v) {
      return law_a.density(v) *
             latent_cdf(family.latents[unpinned[1]], cond.latents[unpinned[1]], theta - v,
                        plane_time);
    };
    const double p = integrate(f, lc_a.hard_lower, theta, 1e-9, 1e-7).value;
    return std::clamp(p, 0.0, 1.0);
  }
  throw std::logic_error("occurrence_probability: more than two unpinned latents");
}

}  // namespace beablesim::detail
