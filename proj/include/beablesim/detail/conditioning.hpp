#pragma once

#include <vector>

#include "beablesim/scenarios.hpp"

namespace beablesim::detail {

/// Conditional law of one family latent given the outside-region data.
/// Either pinned exactly by a click, or restricted by the absence of an
/// outside click.  When the photon source coincides with the query point the
/// restriction is a sharp lower bound; otherwise it is the angular-averaged
/// "click still inside the cone" region described by the soft fields.
struct LatentConditional {
  bool pinned = false;
  double value = 0.0;
  double hard_lower = 0.0;

  bool soft = false;
  Vec3 soft_delta{};       // photon source - query position
  double soft_offset = 0.0; // emission time = soft_offset + tau at constraint time
  double soft_cone_radius = 0.0;
  Vec3 soft_axis{};        // dipole axis of the emission
};

struct FamilyConditional {
  bool consistent = false;
  double likelihood = 0.0;
  std::vector<LatentConditional> latents;
  // Per outside click (record order): this family's density at the click, or
  // 0 when the family does not explain it.  Used for the paper-mode
  // disjoint-support comparison.
  std::vector<double> click_densities;
};

/// Conditions every family of the scenario on the outside-region clicks.  In
/// paper mode a click supported by several families is assigned to the one
/// with the highest density there and the others' likelihoods are zeroed.
std::vector<FamilyConditional> condition_all(const Scenario& scn,
                                             const std::vector<DetectionEvent>& outside_clicks,
                                             const Event& x);

/// P(expr <= t) under the conditional latent laws.  Multi-latent expressions
/// use the independent-conditioning approximation.
double occurrence_probability(const BranchFamily& family, const FamilyConditional& cond,
                              const TimeExpr& expr, double t, double plane_time);

}  // namespace beablesim::detail
