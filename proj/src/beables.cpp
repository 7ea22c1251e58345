#include "beablesim/beables.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "beablesim/detail/conditioning.hpp"

namespace beablesim {

namespace {

bool is_excited_label(const std::string& label) {
  return label == "e" || label == "e2" || label == "e1";
}

std::size_t basis_index(const SiteDef& site, const std::string& label) {
  for (std::size_t i = 0; i < site.basis.size(); ++i) {
    if (site.basis[i] == label) return i;
  }
  throw std::invalid_argument("label " + label + " not in basis of site " + site.name);
}

}  // namespace

LocalOperator LocalOperator::from_matrix(const Scenario& scn, const std::string& site,
                                         const std::vector<std::complex<double>>& entries) {
  const SiteDef& def = scn.site(site);
  const std::size_t dim = def.basis.size();
  if (dim > kMaxDim || entries.size() != dim * dim) {
    throw std::invalid_argument("LocalOperator: matrix does not match the site basis dimension");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      if (std::abs(entries[i * dim + j] - std::conj(entries[j * dim + i])) > 1e-12) {
        throw std::invalid_argument("LocalOperator: matrix is not Hermitian");
      }
    }
  }
  LocalOperator op;
  op.site_ = site;
  op.dim_ = dim;
  for (std::size_t i = 0; i < dim * dim; ++i) op.matrix_[i] = entries[i];
  for (std::size_t i = 0; i < dim; ++i) op.diag_[i] = entries[i * dim + i].real();
  return op;
}

namespace {

std::vector<std::complex<double>> diagonal_matrix(const std::vector<bool>& mask) {
  const std::size_t dim = mask.size();
  std::vector<std::complex<double>> m(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    if (mask[i]) m[i * dim + i] = 1.0;
  }
  return m;
}

}  // namespace

LocalOperator LocalOperator::energy_excited(const Scenario& scn, const std::string& site) {
  const SiteDef& def = scn.site(site);
  std::vector<bool> mask;
  for (const auto& b : def.basis) mask.push_back(is_excited_label(b));
  LocalOperator op = from_matrix(scn, site, diagonal_matrix(mask));
  op.name_ = "energy-excited";
  return op;
}

LocalOperator LocalOperator::energy_ground(const Scenario& scn, const std::string& site) {
  const SiteDef& def = scn.site(site);
  std::vector<bool> mask;
  for (const auto& b : def.basis) mask.push_back(b == "g");
  LocalOperator op = from_matrix(scn, site, diagonal_matrix(mask));
  op.name_ = "energy-ground";
  return op;
}

LocalOperator LocalOperator::basis_projector(const Scenario& scn, const std::string& site,
                                             const std::string& label) {
  const SiteDef& def = scn.site(site);
  std::vector<bool> mask;
  for (const auto& b : def.basis) mask.push_back(b == label);
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("basis_projector: label " + label + " not in site basis");
  }
  LocalOperator op = from_matrix(scn, site, diagonal_matrix(mask));
  op.name_ = label;
  return op;
}

LocalOperator LocalOperator::position_component(const Scenario& scn, const std::string& site) {
  const SiteDef& def = scn.site(site);
  LocalOperator op = from_matrix(scn, site, diagonal_matrix(std::vector<bool>(def.basis.size(), true)));
  op.name_ = "position-component";
  return op;
}

LocalOperator LocalOperator::named(const Scenario& scn, const std::string& site,
                                   const std::string& name) {
  if (name == "energy-excited") return energy_excited(scn, site);
  if (name == "energy-ground") return energy_ground(scn, site);
  if (name == "position-component") return position_component(scn, site);
  return basis_projector(scn, site, name);
}

bool LocalOperator::is_projector(double tol) const {
  // P^2 == P entrywise.
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      std::complex<double> sq{};
      for (std::size_t k = 0; k < dim_; ++k) {
        sq += matrix_[i * dim_ + k] * matrix_[k * dim_ + j];
      }
      if (std::abs(sq - matrix_[i * dim_ + j]) > tol) return false;
    }
  }
  return true;
}

double BeableValue::trace() const {
  double t = 0.0;
  for (double o : occupancy) t += o;
  return t;
}

namespace {

// Occupancy distribution of one site in one family at time t, given the
// conditional latent laws.  The site's transitions form a chain, so the
// occupancies are differences of occurrence probabilities.
std::vector<double> family_occupancy(const Scenario& scn, const BranchFamily& family,
                                     const detail::FamilyConditional& cond,
                                     const SiteDef& site, double t) {
  std::vector<double> occ(site.basis.size(), 0.0);
  const auto init = family.initial_states.find(site.name);
  if (init == family.initial_states.end()) return occ;  // site absent in this family

  std::vector<const Transition*> chain;
  for (const auto& tr : family.state_program) {
    if (tr.site == site.name) chain.push_back(&tr);
  }

  std::string state = init->second;
  std::vector<double> probs;  // P(k-th transition occurred by t), nonincreasing
  double prev = 1.0;
  for (const Transition* tr : chain) {
    if (tr->from != state) {
      throw std::logic_error("state program chain broken for site " + site.name);
    }
    const double p =
        std::min(prev, detail::occurrence_probability(family, cond, tr->when, t, scn.plane.T));
    probs.push_back(p);
    prev = p;
    state = tr->to;
  }

  // Walk the chain again assigning occupancies.
  state = init->second;
  double before = 1.0;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    occ[basis_index(site, state)] += before - probs[k];
    before = probs[k];
    state = chain[k]->to;
  }
  occ[basis_index(site, state)] += before;
  return occ;
}

BeableValue assemble_value(const Scenario& scn, const LocalOperator& op,
                           const std::vector<double>& weights,
                           const std::vector<detail::FamilyConditional>& conds, double t) {
  const SiteDef& site = scn.site(op.site());
  BeableValue out;
  out.basis = site.basis;
  out.occupancy.assign(site.basis.size(), 0.0);

  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    throw InconsistentRecordError("record is inconsistent with every branch family");
  }

  for (std::size_t f = 0; f < scn.families.size(); ++f) {
    const double w = weights[f] / total;
    out.posterior_weights[scn.families[f].label] = w;
    if (w == 0.0) continue;
    const auto occ = family_occupancy(scn, scn.families[f], conds[f], site, t);
    for (std::size_t i = 0; i < occ.size(); ++i) out.occupancy[i] += w * occ[i];
  }
  for (std::size_t i = 0; i < out.occupancy.size(); ++i) {
    out.expectation += out.occupancy[i] * op.diagonal(i);
  }
  return out;
}

double record_plane_time(const DetectionRecord& rec, const Scenario& scn) {
  if (!rec.detections.empty()) return rec.detections.front().plane_time;
  return scn.plane.T;
}

}  // namespace

BeableValue conditional_beable(const Event& x, const LocalOperator& op,
                               const DetectionRecord& rec, const Scenario& scn) {
  const double T = record_plane_time(rec, scn);
  if (!(T > x.t)) {
    throw std::invalid_argument("conditional_beable: detection plane must be after the query time");
  }
  for (const auto& d : rec.detections) {
    if (d.kind != DetectionKind::Position) {
      throw std::invalid_argument(
          "conditional_beable: light-cone conditioning needs position detections");
    }
  }

  const Frame frame{1.0};
  std::vector<DetectionEvent> outside;
  for (const auto& d : rec.detections) {
    if (is_outside_future_lightcone(x, d, frame)) outside.push_back(d);
  }

  const auto conds = detail::condition_all(scn, outside, x);
  std::vector<double> weights(scn.families.size(), 0.0);
  for (std::size_t f = 0; f < scn.families.size(); ++f) {
    weights[f] = scn.families[f].born_weight * conds[f].likelihood;
  }
  return assemble_value(scn, op, weights, conds, x.t);
}

BeableTrajectory beable_trajectory(const std::string& site, const LocalOperator& op,
                                   const DetectionRecord& rec, const Scenario& scn,
                                   const std::vector<double>& grid) {
  const double T = record_plane_time(rec, scn);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] >= T || (i > 0 && grid[i] <= grid[i - 1])) {
      throw std::invalid_argument("beable_trajectory: grid must be increasing within [0, T)");
    }
  }
  const Vec3 pos = scn.site(site).position;
  BeableTrajectory traj;
  traj.site = site;
  traj.op_name = op.name();
  traj.op_is_projector = op.is_projector();
  traj.times = grid;
  traj.values.reserve(grid.size());
  for (double t : grid) {
    traj.values.push_back(conditional_beable(Event{t, pos}, op, rec, scn));
  }
  return traj;
}

BeableValue marginal_beable(const Event& x, const LocalOperator& op, const Scenario& scn) {
  std::vector<detail::FamilyConditional> priors(scn.families.size());
  std::vector<double> weights(scn.families.size(), 0.0);
  for (std::size_t f = 0; f < scn.families.size(); ++f) {
    priors[f].consistent = true;
    priors[f].likelihood = 1.0;
    priors[f].latents.assign(scn.families[f].latents.size(), detail::LatentConditional{});
    weights[f] = scn.families[f].born_weight;
  }
  return assemble_value(scn, op, weights, priors, x.t);
}

std::optional<double> transition_time(const BeableTrajectory& traj, double threshold) {
  if (!traj.op_is_projector) {
    throw std::invalid_argument("transition_time: operator is not a projector");
  }
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.values[i].expectation < threshold) return traj.times[i];
  }
  return std::nullopt;
}

BeableValue abl_beable(const Event& x, const LocalOperator& op,
                       const std::optional<Vec3>& final_outcome, const Scenario& scn) {
  if (scn.config.kind != ScenarioKind::AbsorberMomentum &&
      scn.config.kind != ScenarioKind::Absorber) {
    throw std::invalid_argument("abl_beable: scenario has no momentum-mode branch algebra");
  }
  const double t = x.t;
  if (t < 0.0) throw std::invalid_argument("abl_beable: query before the initial surface");

  const double wa = std::norm(scn.config.alpha);
  const double wb = std::norm(scn.config.beta);
  const double decayed = -std::expm1(-scn.config.gamma * t);
  const double excited = 1.0 - decayed;

  // Intermediate branch algebra in the asymptotic-T limit, with branch
  // states decohered: photon outcomes post-select the escape branch, the
  // null outcome the absorbed branch.
  double w_e_obj0 = 0.0, w_g_obj0star = 0.0, w_e_obj100 = 0.0, w_g_obj100 = 0.0;
  if (final_outcome.has_value()) {
    if (wb <= 0.0) {
      throw InconsistentRecordError("abl_beable: photon outcome has zero amplitude");
    }
    w_e_obj100 = excited;
    w_g_obj100 = decayed;
  } else {
    if (wa <= 0.0) {
      throw InconsistentRecordError("abl_beable: null outcome has zero amplitude");
    }
    w_e_obj0 = excited;
    w_g_obj0star = decayed;
  }

  const SiteDef& site = scn.site(op.site());
  BeableValue out;
  out.basis = site.basis;
  out.occupancy.assign(site.basis.size(), 0.0);
  out.posterior_weights["absorbed"] = final_outcome ? 0.0 : 1.0;
  out.posterior_weights["escape"] = final_outcome ? 1.0 : 0.0;

  auto add = [&](const std::string& label, double w) {
    if (w != 0.0) out.occupancy[basis_index(site, label)] += w;
  };
  if (op.site() == "atom") {
    add("e", w_e_obj0 + w_e_obj100);
    add("g", w_g_obj0star + w_g_obj100);
  } else if (op.site() == "object_origin") {
    add("obj0", w_e_obj0);
    add("obj0star", w_g_obj0star);
  } else if (op.site() == "object_offset") {
    add("obj100", w_e_obj100 + w_g_obj100);
  } else {
    throw std::invalid_argument("abl_beable: unknown site " + op.site());
  }

  for (std::size_t i = 0; i < out.occupancy.size(); ++i) {
    out.expectation += out.occupancy[i] * op.diagonal(i);
  }
  return out;
}

std::string trajectory_to_csv(const BeableTrajectory& traj) {
  std::ostringstream os;
  os << "t_s,site,operator,expectation,trace_dist_excited\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const BeableValue& v = traj.values[i];
    // Trace distance to the excited projector state; the states are
    // diagonal, so it is half the l1 distance of the diagonals.
    double dist = 0.0;
    for (std::size_t b = 0; b < v.basis.size(); ++b) {
      const double target = is_excited_label(v.basis[b]) && v.basis[b] != "e1" ? 1.0 : 0.0;
      dist += std::abs(v.occupancy[b] - target);
    }
    dist *= 0.5;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", traj.times[i]);
    os << buf << "," << traj.site << "," << traj.op_name << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", v.expectation);
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", dist);
    os << buf << "\n";
  }
  return os.str();
}

}  // namespace beablesim
