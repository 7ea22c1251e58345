#include "beablesim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "beablesim/detail/conditioning.hpp"

namespace beablesim {

namespace {

constexpr double kPi = std::numbers::pi;

// Latent recovery tolerance in time units, tied to the cone tolerance.
double latent_tol(double plane_time) { return kConeRelTol * plane_time + 1e-12; }

double weight(std::complex<double> a) { return std::norm(a); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("scenario config: " + msg);
}

}  // namespace

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SingleDecay: return "single_decay";
    case ScenarioKind::TwoSite: return "two_site";
    case ScenarioKind::Cascade: return "cascade";
    case ScenarioKind::Absorber: return "absorber";
    case ScenarioKind::AbsorberMomentum: return "absorber_momentum";
  }
  return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "single_decay") return ScenarioKind::SingleDecay;
  if (name == "two_site") return ScenarioKind::TwoSite;
  if (name == "cascade") return ScenarioKind::Cascade;
  if (name == "absorber") return ScenarioKind::Absorber;
  if (name == "absorber_momentum") return ScenarioKind::AbsorberMomentum;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

double TimeExpr::eval(const std::vector<double>& latent_values) const {
  double t = constant;
  for (std::size_t idx : latents) t += latent_values.at(idx);
  return t;
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
  std::vector<std::string> warnings;
  require(cfg.gamma > 0.0, "gamma must be > 0");
  require(cfg.omega > 0.0, "omega must be > 0");
  require(cfg.plane_time > 0.0, "plane time must be > 0");

  EmitterParams line;
  line.gamma = cfg.gamma;
  line.omega = cfg.omega;

  switch (cfg.kind) {
    case ScenarioKind::SingleDecay:
      break;
    case ScenarioKind::TwoSite: {
      require(std::abs(weight(cfg.alpha) + weight(cfg.beta) - 1.0) <= 1e-12,
              "|alpha|^2 + |beta|^2 must be 1");
      require(cfg.separation > 0.0, "two-site separation must be > 0");
      if (cfg.separation < 10.0 * line.wavelength()) {
        warnings.push_back("two-site separation is not >> wavelength; overlap not negligible");
      }
      break;
    }
    case ScenarioKind::Cascade: {
      require(cfg.gamma2 > 0.0, "gamma2 must be > 0");
      require(cfg.omega2 > 0.0, "omega2 must be > 0");
      if (cfg.plane_time < 5.0 * (1.0 / cfg.gamma + 1.0 / cfg.gamma2)) {
        warnings.push_back("plane time is not >> 1/gamma1 + 1/gamma2");
      }
      break;
    }
    case ScenarioKind::Absorber:
    case ScenarioKind::AbsorberMomentum: {
      require(std::abs(weight(cfg.alpha) + weight(cfg.beta) - 1.0) <= 1e-12,
              "|alpha|^2 + |beta|^2 must be 1");
      require(cfg.shell_radius > 0.0, "shell radius must be > 0");
      require(cfg.shell_inner > 0.0 && cfg.shell_inner < cfg.shell_radius,
              "shell inner radius must be in (0, R)");
      if (cfg.shell_radius < 10.0 / cfg.gamma) {
        warnings.push_back("shell radius is not >> 10 c / gamma");
      }
      break;
    }
  }
  return warnings;
}

const SiteDef& Scenario::site(const std::string& name) const {
  for (const auto& s : sites) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown site: " + name);
}

const BranchFamily& Scenario::family(const std::string& label) const {
  for (const auto& f : families) {
    if (f.label == label) return f;
  }
  throw std::invalid_argument("unknown branch family: " + label);
}

namespace {

EmissionSpec make_emission(const std::string& id, double gamma, double omega, const Vec3& source,
                           TimeExpr when) {
  EmissionSpec e;
  e.photon_id = id;
  e.params.gamma = gamma;
  e.params.omega = omega;
  e.params.source = Event{0.0, source};
  e.params.dipole_axis = {0.0, 0.0, 1.0};
  e.k_norm = normalization_constant(e.params);
  e.emit_time = std::move(when);
  return e;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& cfg) {
  (void)validate(cfg);  // throws on hard errors; warnings surface via the harness

  Scenario scn;
  scn.config = cfg;
  scn.plane.T = cfg.plane_time;
  const double T = cfg.plane_time;

  switch (cfg.kind) {
    case ScenarioKind::SingleDecay: {
      scn.sites.push_back({"atom", {0.0, 0.0, 0.0}, {"e", "g"}});

      const double p_emit = -std::expm1(-cfg.gamma * T);
      BranchFamily emit;
      emit.label = "emit";
      emit.born_weight = p_emit;
      emit.latents.push_back({"tau", cfg.gamma, T});
      emit.state_program.push_back({"atom", "e", "g", TimeExpr{0.0, {0}}});
      emit.emissions.push_back(
          make_emission("0", cfg.gamma, cfg.omega, {0, 0, 0}, TimeExpr{0.0, {0}}));
      emit.initial_states["atom"] = "e";
      scn.families.push_back(std::move(emit));

      BranchFamily residue;
      residue.label = "no-emission";
      residue.born_weight = 1.0 - p_emit;
      residue.initial_states["atom"] = "e";
      scn.families.push_back(std::move(residue));
      break;
    }
    case ScenarioKind::TwoSite: {
      const double d = cfg.separation;
      scn.sites.push_back({"atom_minus", {0.0, 0.0, -0.5 * d}, {"e", "g"}});
      scn.sites.push_back({"atom_plus", {0.0, 0.0, 0.5 * d}, {"e", "g"}});

      auto family = [&](const std::string& label, double w, const std::string& site, double z) {
        BranchFamily f;
        f.label = label;
        f.born_weight = w;
        f.latents.push_back({"tau", cfg.gamma, std::nullopt});
        f.state_program.push_back({site, "e", "g", TimeExpr{0.0, {0}}});
        f.emissions.push_back(
            make_emission("0", cfg.gamma, cfg.omega, {0.0, 0.0, z}, TimeExpr{0.0, {0}}));
        f.initial_states[site] = "e";
        return f;
      };
      scn.families.push_back(family("minus", weight(cfg.alpha), "atom_minus", -0.5 * d));
      scn.families.push_back(family("plus", weight(cfg.beta), "atom_plus", 0.5 * d));
      break;
    }
    case ScenarioKind::Cascade: {
      scn.sites.push_back({"atom", {0.0, 0.0, 0.0}, {"e2", "e1", "g"}});

      BranchFamily f;
      f.label = "cascade";
      f.born_weight = 1.0;
      f.latents.push_back({"tau1", cfg.gamma, std::nullopt});
      f.latents.push_back({"tau2", cfg.gamma2, std::nullopt});
      f.state_program.push_back({"atom", "e2", "e1", TimeExpr{0.0, {0}}});
      f.state_program.push_back({"atom", "e1", "g", TimeExpr{0.0, {0, 1}}});
      f.emissions.push_back(make_emission("0", cfg.gamma, cfg.omega, {0, 0, 0}, TimeExpr{0.0, {0}}));
      f.emissions.push_back(
          make_emission("1", cfg.gamma2, cfg.omega2, {0, 0, 0}, TimeExpr{0.0, {0, 1}}));
      f.initial_states["atom"] = "e2";
      scn.families.push_back(std::move(f));
      break;
    }
    case ScenarioKind::Absorber:
    case ScenarioKind::AbsorberMomentum: {
      const double offset = cfg.object_offset > 0.0 ? cfg.object_offset : 100.0 * cfg.shell_radius;
      scn.sites.push_back({"atom", {0.0, 0.0, 0.0}, {"e", "g"}});
      scn.sites.push_back({"object_origin", {0.0, 0.0, 0.0}, {"obj0", "obj0star"}});
      scn.sites.push_back({"object_offset", {offset, 0.0, 0.0}, {"obj100"}});

      BranchFamily absorbed;
      absorbed.label = "absorbed";
      absorbed.born_weight = weight(cfg.alpha);
      absorbed.latents.push_back({"tau", cfg.gamma, std::nullopt});
      absorbed.state_program.push_back({"atom", "e", "g", TimeExpr{0.0, {0}}});
      // Absorption one inner-shell flight time after emission.
      absorbed.state_program.push_back(
          {"object_origin", "obj0", "obj0star", TimeExpr{cfg.shell_inner, {0}}});
      absorbed.initial_states["atom"] = "e";
      absorbed.initial_states["object_origin"] = "obj0";
      scn.families.push_back(std::move(absorbed));

      BranchFamily escape;
      escape.label = "escape";
      escape.born_weight = weight(cfg.beta);
      escape.latents.push_back({"tau", cfg.gamma, T});
      escape.state_program.push_back({"atom", "e", "g", TimeExpr{0.0, {0}}});
      escape.emissions.push_back(
          make_emission("0", cfg.gamma, cfg.omega, {0, 0, 0}, TimeExpr{0.0, {0}}));
      escape.initial_states["atom"] = "e";
      escape.initial_states["object_offset"] = "obj100";
      scn.families.push_back(std::move(escape));
      break;
    }
  }

  double total = 0.0;
  for (const auto& f : scn.families) total += f.born_weight;
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::logic_error("branch family weights do not sum to 1");
  }
  return scn;
}

TrialSample sample_record(const Scenario& scn, RngStream& rng) {
  const ScenarioConfig& cfg = scn.config;
  TrialSample out;
  EmitterParams line;
  line.gamma = cfg.gamma;
  line.omega = cfg.omega;

  switch (cfg.kind) {
    case ScenarioKind::SingleDecay: {
      const auto d = sample_ideal_single(line, scn.plane, rng);
      if (d) {
        out.record.detections.push_back(*d);
        out.branch = "emit";
      } else {
        out.branch = "no-emission";
        out.record.no_detection_branches.push_back(out.branch);
      }
      break;
    }
    case ScenarioKind::TwoSite: {
      const auto s = sample_superposed(line, cfg.alpha, cfg.beta, cfg.separation, scn.plane, rng);
      out.branch = s.branch;
      if (s.detection) {
        out.record.detections.push_back(*s.detection);
      } else {
        out.record.no_detection_branches.push_back(s.branch);
      }
      break;
    }
    case ScenarioKind::Cascade: {
      CascadeParams cp;
      cp.gamma1 = cfg.gamma;
      cp.gamma2 = cfg.gamma2;
      cp.omega1 = cfg.omega;
      cp.omega2 = cfg.omega2;
      const auto s = sample_cascade(cp, scn.plane, rng);
      out.record.detections.push_back(s.first);
      out.record.detections.push_back(s.second);
      out.branch = "cascade";
      out.resamples = s.resamples;
      break;
    }
    case ScenarioKind::Absorber: {
      const auto d = sample_absorber(line, cfg.alpha, cfg.beta, scn.plane, rng);
      if (d) {
        out.record.detections.push_back(*d);
        out.branch = "escape";
      } else {
        out.branch = "absorbed";
        out.record.no_detection_branches.push_back(out.branch);
      }
      break;
    }
    case ScenarioKind::AbsorberMomentum: {
      const auto p = sample_momentum(line, cfg.alpha, cfg.beta, rng);
      if (p) {
        DetectionEvent d;
        d.kind = DetectionKind::Momentum;
        d.momentum = *p;
        d.plane_time = scn.plane.T;
        d.photon_id = "0";
        out.record.detections.push_back(d);
        out.branch = "escape";
        out.momentum = *p;
      } else {
        out.branch = "absorbed";
        out.record.no_detection_branches.push_back(out.branch);
      }
      break;
    }
  }
  return out;
}

namespace {

struct LatentRecovery {
  bool consistent = false;
  std::vector<PinnedLatent> latents;
  double density = 0.0;  // product of click density factors
};

double conditional_density(const LatentSpec& spec, double v) {
  if (v < 0.0) return 0.0;
  double norm = 1.0;
  if (spec.truncation) {
    if (v > *spec.truncation) return 0.0;
    norm = -std::expm1(-spec.rate * *spec.truncation);
  }
  return spec.rate * std::exp(-spec.rate * v) / norm;
}

// Angular density of the emission direction over solid angle.
double direction_density(const EmissionSpec& e, const Vec3& direction) {
  const double c = dot(normalized(direction), normalized(e.params.dipole_axis));
  return 3.0 / (8.0 * kPi) * (1.0 - c * c);
}

// Tries to explain every click of the record as this family's photons and
// recover the latent emission times exactly from the click radii.
LatentRecovery recover_latents(const Scenario& scn, const BranchFamily& family,
                               const DetectionRecord& rec) {
  LatentRecovery out;
  const double T = scn.plane.T;
  const double tol = latent_tol(T);

  out.latents.assign(family.latents.size(), PinnedLatent{});
  out.density = 1.0;

  std::vector<const DetectionEvent*> unexplained;
  unexplained.reserve(rec.detections.size());
  for (const auto& d : rec.detections) unexplained.push_back(&d);

  for (const auto& emission : family.emissions) {
    const DetectionEvent* click = nullptr;
    for (auto it = unexplained.begin(); it != unexplained.end(); ++it) {
      if ((*it)->photon_id == emission.photon_id) {
        click = *it;
        unexplained.erase(it);
        break;
      }
    }
    if (click == nullptr) {
      // Photon not on the plane: only possible for untruncated latent laws;
      // the emission time then lies beyond the horizon.
      std::size_t unpinned_idx = family.latents.size();
      int unpinned = 0;
      double c0 = emission.emit_time.constant;
      for (std::size_t idx : emission.emit_time.latents) {
        if (out.latents[idx].pinned) {
          c0 += out.latents[idx].value;
        } else {
          unpinned_idx = idx;
          ++unpinned;
        }
      }
      if (unpinned == 0) return out;  // pinned emission must have clicked
      if (unpinned == 1) {
        const auto& spec = family.latents[unpinned_idx];
        if (spec.truncation && c0 + *spec.truncation <= T + tol) return out;
        auto& lat = out.latents[unpinned_idx];
        lat.lower_bound = std::max(lat.lower_bound, T - c0);
      }
      continue;
    }
    if (click->kind != DetectionKind::Position) {
      return out;  // momentum outcomes carry no radius to pin
    }

    const double radius = norm(click->position - emission.params.source.r);
    const double s_pin = T - radius;
    double c0 = emission.emit_time.constant;
    std::size_t unpinned_idx = family.latents.size();
    int unpinned = 0;
    for (std::size_t idx : emission.emit_time.latents) {
      if (out.latents[idx].pinned) {
        c0 += out.latents[idx].value;
      } else {
        unpinned_idx = idx;
        ++unpinned;
      }
    }
    if (unpinned == 0) {
      if (std::abs(c0 - s_pin) > tol) return out;
      continue;
    }
    if (unpinned > 1) {
      throw std::logic_error("recover_latents: emission time depends on several unpinned latents");
    }
    double v = s_pin - c0;
    if (v < -tol) return out;
    v = std::max(v, 0.0);
    const auto& spec = family.latents[unpinned_idx];
    if (spec.truncation && v > *spec.truncation + tol) return out;
    if (radius <= tol) return out;
    out.latents[unpinned_idx].pinned = true;
    out.latents[unpinned_idx].value = v;

    const double f = conditional_density(spec, spec.truncation ? std::min(v, *spec.truncation) : v);
    if (f <= 0.0) return out;
    out.density *= f *
                   direction_density(emission, click->position - emission.params.source.r) /
                   (radius * radius);
  }

  if (!unexplained.empty()) return out;  // clicks this family cannot produce
  out.consistent = true;
  return out;
}

}  // namespace

PinnedHistory pin_branch(const Scenario& scn, const DetectionRecord& rec,
                         const std::optional<std::string>& branch_hint) {
  std::string label;
  LatentRecovery best;

  if (branch_hint) {
    label = *branch_hint;
    best = recover_latents(scn, scn.family(label), rec);
    if (!best.consistent) {
      throw std::invalid_argument("pin_branch: record inconsistent with branch " + label);
    }
  } else if (rec.detections.empty() && !rec.no_detection_branches.empty()) {
    label = rec.no_detection_branches.front();
    best = recover_latents(scn, scn.family(label), rec);
    if (!best.consistent) {
      throw std::invalid_argument("pin_branch: record inconsistent with branch " + label);
    }
  } else {
    // Paper-mode rule: the highest-density family owns the clicks.
    double best_score = -1.0;
    for (const auto& f : scn.families) {
      auto r = recover_latents(scn, f, rec);
      if (!r.consistent) continue;
      const double score = rec.detections.empty() ? f.born_weight : r.density;
      if (score > best_score) {
        best_score = score;
        best = std::move(r);
        label = f.label;
      }
    }
    if (best_score < 0.0) {
      throw std::invalid_argument("pin_branch: record inconsistent with every branch");
    }
  }

  const BranchFamily& family = scn.family(label);

  PinnedHistory hist;
  hist.branch = label;
  hist.latents = best.latents;

  // Unpinned latents are represented at their conditional mean so the pinned
  // trajectory is a definite (typical) member of the family.
  std::vector<double> values(family.latents.size(), 0.0);
  for (std::size_t i = 0; i < family.latents.size(); ++i) {
    if (best.latents[i].pinned) {
      values[i] = best.latents[i].value;
    } else {
      values[i] = best.latents[i].lower_bound + 1.0 / family.latents[i].rate;
    }
  }

  for (const auto& site : scn.sites) {
    std::vector<StateStep> steps;
    const auto init = family.initial_states.find(site.name);
    steps.push_back({-std::numeric_limits<double>::infinity(),
                     init != family.initial_states.end() ? init->second : "absent"});
    hist.trajectories[site.name] = std::move(steps);
    hist.transition_times[site.name] = {};
  }

  std::vector<std::pair<double, const Transition*>> ordered;
  ordered.reserve(family.state_program.size());
  for (const auto& tr : family.state_program) {
    ordered.emplace_back(tr.when.eval(values), &tr);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [time, tr] : ordered) {
    auto& steps = hist.trajectories.at(tr->site);
    if (steps.back().state != tr->from) {
      throw std::logic_error("pin_branch: state program out of order for site " + tr->site);
    }
    steps.push_back({time, tr->to});
    hist.transition_times.at(tr->site).push_back(time);
  }
  return hist;
}

std::string state_at(const PinnedHistory& hist, const std::string& site, double t) {
  const auto it = hist.trajectories.find(site);
  if (it == hist.trajectories.end()) {
    throw std::invalid_argument("state_at: unknown site " + site);
  }
  std::string state = it->second.front().state;
  for (const auto& step : it->second) {
    // Boundary convention: the post-transition state holds from the
    // transition time on.
    if (step.time <= t) state = step.state;
  }
  return state;
}

double branch_likelihood(const Scenario& scn, const BranchFamily& family,
                         const DetectionRecord& outside_data, const Event& x) {
  const auto conds = detail::condition_all(scn, outside_data.detections, x);
  for (std::size_t i = 0; i < scn.families.size(); ++i) {
    if (scn.families[i].label == family.label) return conds[i].likelihood;
  }
  throw std::invalid_argument("branch_likelihood: family not part of the scenario");
}

}  // namespace beablesim
