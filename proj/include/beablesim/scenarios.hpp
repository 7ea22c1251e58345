#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beablesim/detection.hpp"
#include "beablesim/photon_wave.hpp"
#include "beablesim/rng.hpp"
#include "beablesim/spacetime.hpp"

namespace beablesim {

enum class ScenarioKind {
  SingleDecay,      // one excited atom at the origin
  TwoSite,          // atom in a superposition of two emission sites
  Cascade,          // two-step decay, two photons
  Absorber,         // superposed absorbing object, position detection
  AbsorberMomentum  // same system, late-time momentum measurement (ABL)
};

const char* to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& name);

enum class ConditioningMode { Paper, ExactPosterior };

/// A site is a named location carrying a small internal basis; "absent"
/// states are represented by occupation mass leaving the listed basis.
struct SiteDef {
  std::string name;
  Vec3 position{};
  std::vector<std::string> basis;  // e.g. {"e", "g"} or {"obj0", "obj0star", "obj100"}
};

struct LatentSpec {
  std::string name;
  double rate = 1.0;                     // exponential rate
  std::optional<double> truncation{};    // conditioned on value <= truncation
};

/// Linear time expression constant + sum of latent values (unit coefficients).
struct TimeExpr {
  double constant = 0.0;
  std::vector<std::size_t> latents;  // indices into the family latent list

  double eval(const std::vector<double>& latent_values) const;
};

struct Transition {
  std::string site;
  std::string from;
  std::string to;
  TimeExpr when;
};

/// One photon a family predicts: emitted from `source_site` at `emit_time`,
/// with the emission envelope of `params`.
struct EmissionSpec {
  std::string photon_id;
  EmitterParams params;   // source position filled in from the site
  double k_norm = 0.0;    // cached normalisation constant
  TimeExpr emit_time;
};

/// One superposition component with its continuous emission-time family.
struct BranchFamily {
  std::string label;
  double born_weight = 0.0;
  std::vector<LatentSpec> latents;
  std::vector<Transition> state_program;   // per site, nondecreasing times
  std::vector<EmissionSpec> emissions;
  std::map<std::string, std::string> initial_states;  // site -> basis label; missing = absent
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::SingleDecay;
  double gamma = 1.0;
  double omega = 1.0e6;
  double gamma2 = 1.0;   // cascade second step
  double omega2 = 1.0e6;
  std::complex<double> alpha{1.0, 0.0};
  std::complex<double> beta{0.0, 0.0};
  double separation = 0.0;      // two-site distance d
  double shell_radius = 0.0;    // absorber outer radius R
  double shell_inner = 0.0;     // absorber inner radius R'
  double object_offset = 0.0;   // second object position (default 100 R)
  double plane_time = 30.0;     // T
  ConditioningMode mode = ConditioningMode::Paper;
};

/// Validates parameter completeness per kind; returns human-readable
/// warnings for soft regime violations (d >> lambda, R >> 10 c / gamma).
std::vector<std::string> validate(const ScenarioConfig& cfg);

struct Scenario {
  ScenarioConfig config;
  std::vector<SiteDef> sites;
  std::vector<BranchFamily> families;
  DetectorPlane plane;

  const SiteDef& site(const std::string& name) const;
  const BranchFamily& family(const std::string& label) const;
};

/// Builds the branch decomposition for the configured toy model.  Throws on
/// inconsistent configuration.
Scenario build_scenario(const ScenarioConfig& cfg);

/// One sampled trial: the detection record plus the branch realised by the
/// sampler (ground truth for pinning).
struct TrialSample {
  DetectionRecord record;
  std::string branch;
  std::optional<Vec3> momentum{};  // momentum outcome for the ABL scenario
  int resamples = 0;               // cascade pairs rejected off the plane
};

/// Samples one fictitious late-time measurement for the scenario.
TrialSample sample_record(const Scenario& scn, RngStream& rng);

/// State of a latent after pinning: either an exact value or a lower bound
/// ("the click is still inside some light cone / beyond the plane").
struct PinnedLatent {
  bool pinned = false;
  double value = 0.0;        // exact value when pinned
  double lower_bound = 0.0;  // constraint tau > lower_bound otherwise
};

struct StateStep {
  double time;
  std::string state;
};

/// A branch plus concrete latent times and the resulting piecewise-constant
/// per-site trajectories.
struct PinnedHistory {
  std::string branch;
  std::vector<PinnedLatent> latents;
  std::map<std::string, std::vector<StateStep>> trajectories;  // first step at t = -inf start
  std::map<std::string, std::vector<double>> transition_times; // per site, realised transitions
};

/// Recovers latent emission times exactly from the click radii and evaluates
/// the state program.  The branch is taken from `branch_hint` when provided
/// (the harness records it); otherwise it is inferred by the paper-mode
/// maximum-density rule.  Throws if the record is inconsistent with every
/// branch.
PinnedHistory pin_branch(const Scenario& scn, const DetectionRecord& rec,
                         const std::optional<std::string>& branch_hint = std::nullopt);

/// Probability (density) of the observed outside-region click pattern under
/// the family, marginalising latents consistent with "no click outside".
/// In paper mode a click supported by several families counts only for the
/// family with the highest density there (disjoint-support approximation).
double branch_likelihood(const Scenario& scn, const BranchFamily& family,
                         const DetectionRecord& outside_data, const Event& x);

/// State of `site` at time t in the pinned history.
std::string state_at(const PinnedHistory& hist, const std::string& site, double t);

}  // namespace beablesim
