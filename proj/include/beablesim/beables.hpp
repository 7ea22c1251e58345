#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "beablesim/scenarios.hpp"

namespace beablesim {

/// Thrown when a record assigns zero likelihood to every branch family.
class InconsistentRecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hermitian operator on one site's internal basis (dimension <= 3).  The
/// branch states carry no coherences, so expectation values involve only the
/// operator diagonal; the full matrix is kept for the Hermiticity and
/// projector checks.
class LocalOperator {
 public:
  static constexpr std::size_t kMaxDim = 3;

  /// Builds from a row-major dim x dim matrix; rejects non-Hermitian input
  /// (tolerance 1e-12) and dimension mismatch with the site basis.
  static LocalOperator from_matrix(const Scenario& scn, const std::string& site,
                                   const std::vector<std::complex<double>>& entries);

  /// Projector onto the excited labels of the site basis (e, e2, e1).
  static LocalOperator energy_excited(const Scenario& scn, const std::string& site);
  /// Projector onto the ground label.
  static LocalOperator energy_ground(const Scenario& scn, const std::string& site);
  /// Projector onto one basis label.
  static LocalOperator basis_projector(const Scenario& scn, const std::string& site,
                                       const std::string& label);
  /// Occupation of the site (identity on its basis): the position-component
  /// projector for object sites.
  static LocalOperator position_component(const Scenario& scn, const std::string& site);

  /// Named lookup used by configs: energy-excited, energy-ground,
  /// position-component, or a basis label.
  static LocalOperator named(const Scenario& scn, const std::string& site,
                             const std::string& name);

  const std::string& site() const { return site_; }
  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  double diagonal(std::size_t i) const { return diag_[i]; }
  bool is_projector(double tol = 1e-12) const;

 private:
  std::string site_;
  std::string name_ = "custom";
  std::size_t dim_ = 0;
  std::array<std::complex<double>, kMaxDim * kMaxDim> matrix_{};
  std::array<double, kMaxDim> diag_{};
};

/// A beable value: the posterior-weighted local state.  `occupancy` holds
/// the diagonal of the (possibly subnormalised) site density matrix; its
/// trace is the posterior probability that the site is occupied at all, so
/// it is 1 for always-occupied sites and can drop to ~0 at a site whose
/// superposition component was ruled out.
struct BeableValue {
  double expectation = 0.0;
  std::vector<std::string> basis;
  std::vector<double> occupancy;
  std::map<std::string, double> posterior_weights;

  double trace() const;
};

struct BeableTrajectory {
  std::string site;
  std::string op_name;
  bool op_is_projector = true;
  std::vector<double> times;
  std::vector<BeableValue> values;
};

/// The light-cone rule: condition only on clicks outside the future light
/// cone of x; posterior over branch families proportional to born weight
/// times branch likelihood; the beable is the posterior-weighted local
/// expectation.  Clicks inside the cone contribute nothing.
BeableValue conditional_beable(const Event& x, const LocalOperator& op,
                               const DetectionRecord& rec, const Scenario& scn);

/// conditional_beable evaluated on a time grid at the site's location.
BeableTrajectory beable_trajectory(const std::string& site, const LocalOperator& op,
                                   const DetectionRecord& rec, const Scenario& scn,
                                   const std::vector<double>& grid);

/// Expectation of conditional_beable over the detection distribution,
/// computed analytically from the branch densities: the unconditioned
/// reduced state at x.
BeableValue marginal_beable(const Event& x, const LocalOperator& op, const Scenario& scn);

/// First grid time where the expectation of the (projector) operator drops
/// below the threshold; none when the trajectory never crosses.
std::optional<double> transition_time(const BeableTrajectory& traj, double threshold = 0.5);

/// Pre/post-selected beable: the initial state is the pre-selection, the
/// late-time momentum outcome (a momentum vector, or no photon) the
/// post-selection.  Evaluated in the scenario's finite branch algebra in the
/// asymptotic-T limit, with distinct intermediate branch states treated as
/// decohered (their photon contents occupy disjoint radial shells on the
/// measurement plane).  Throws when the outcome has zero probability.
BeableValue abl_beable(const Event& x, const LocalOperator& op,
                       const std::optional<Vec3>& final_outcome, const Scenario& scn);

/// Writes a trajectory as CSV rows: time, site, operator, expectation,
/// trace distance to the excited projector (atom sites).
std::string trajectory_to_csv(const BeableTrajectory& traj);

}  // namespace beablesim
